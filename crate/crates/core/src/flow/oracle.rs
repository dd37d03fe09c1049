use super::FlowConfig;
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::calculus::eigen::EigenDecomposition;
use crate::error::{Error, Result};
use crate::paths::Path;
use crate::Mat;

/// Spectral flow from endpoint projections, with the partition check.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// `τ(χ_{[0,∞)}(end)) − τ(χ_{[0,∞)}(start))`.
    pub value: f64,
    /// `Σ ind(P_{t_{i-1}} P_{t_i})` over a uniform partition.
    pub partition_sum: f64,
    /// Set when an endpoint eigenvalue lies within the kernel threshold.
    pub degenerate: bool,
}

/// `χ_{[0,∞)}(X)` with eigenvalues in `[-kernel_tol·‖X‖, 0)` counted as zero.
/// Also reports whether any eigenvalue was that close to zero.
pub fn nonnegative_projection(x: &BlockOperator, kernel_tol: f64) -> Result<(BlockOperator, bool)> {
    let eig = EigenDecomposition::new(x)?;
    let thr = kernel_tol * eig.max_abs_eigenvalue().max(1.0);
    let degenerate = eig.min_abs_eigenvalue() <= thr;
    Ok((eig.apply(|v| if v >= -thr { 1.0 } else { 0.0 }), degenerate))
}

fn count_nonnegative(model: &SemifiniteModel, x: &BlockOperator, kernel_tol: f64) -> Result<(f64, bool)> {
    let eig = EigenDecomposition::new(x)?;
    let thr = kernel_tol * eig.max_abs_eigenvalue().max(1.0);
    let degenerate = eig.min_abs_eigenvalue() <= thr;
    Ok((eig.trace_of(&model.weights(), |v| if v >= -thr { 1.0 } else { 0.0 }), degenerate))
}

/// `Σ_i ind(P_{t_{i-1}} P_{t_i})` over `pieces` equal subintervals.
pub fn sf_partition_sum<P: Path + ?Sized>(
    model: &SemifiniteModel,
    path: &P,
    pieces: usize,
    cfg: &FlowConfig,
) -> Result<f64> {
    let (a, b) = path.domain();
    let mut prev = nonnegative_projection(&path.evaluate(a)?, cfg.kernel_tol)?.0;
    let mut total = 0.0;
    for i in 1..=pieces {
        let t = if i == pieces { b } else { a + (b - a) * i as f64 / pieces as f64 };
        let cur = nonnegative_projection(&path.evaluate(t)?, cfg.kernel_tol)?.0;
        total += relative_index_exact(model, &cur, &prev, cfg.kernel_tol)?;
        prev = cur;
    }
    Ok(total)
}

/// The crossing oracle: telescoped endpoint counts, cross-checked against the
/// partition sum over 64 subintervals.
pub fn sf_oracle<P: Path + ?Sized>(model: &SemifiniteModel, path: &P, cfg: &FlowConfig) -> Result<OracleResult> {
    let (end, d_end) = count_nonnegative(model, &path.end()?, cfg.kernel_tol)?;
    let (start, d_start) = count_nonnegative(model, &path.start()?, cfg.kernel_tol)?;
    let value = end - start;
    let partition_sum = sf_partition_sum(model, path, 64, cfg)?;
    let scale = model.total_weight().max(1.0);
    if (partition_sum - value).abs() > 1e-9 * scale {
        return Err(Error::InvalidParameter(format!(
            "partition sum {partition_sum} disagrees with endpoint count {value}"
        )));
    }
    Ok(OracleResult {
        value,
        partition_sum,
        degenerate: d_end || d_start,
    })
}

/// Orthonormal basis of the range of a projection block.
fn range_basis(p: &Mat) -> Result<Mat> {
    let eig = EigenDecomposition::new(&BlockOperator::hermitian(vec![p.clone()])?)?;
    let vals = &eig.values()[0];
    let u = &eig.vectors()[0];
    let ran: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    Ok(u.select_columns(&ran))
}

/// Dimension of `ran V ∩ ker Q` where `V` has orthonormal columns.
fn kernel_dimension(q: &Mat, v: &Mat, tol: f64) -> usize {
    if v.ncols() == 0 {
        return 0;
    }
    let qv = q * v;
    let sv = qv.singular_values();
    sv.iter().filter(|s| **s <= tol).count() + v.ncols().saturating_sub(sv.len())
}

fn check_projection(p: &BlockOperator) -> Result<()> {
    let defect = p.projection_defect();
    if defect > 1e-10 {
        return Err(Error::NotProjection(defect));
    }
    Ok(())
}

/// `ind(QP) = τ(ran P ∩ ker Q) − τ(ker P ∩ ran Q)`.
pub fn relative_index_exact(
    model: &SemifiniteModel,
    p: &BlockOperator,
    q: &BlockOperator,
    kernel_tol: f64,
) -> Result<f64> {
    model.check(p)?;
    model.check(q)?;
    check_projection(p)?;
    check_projection(q)?;
    let tol = kernel_tol.max(1e-12);
    let mut total = 0.0;
    for ((block, pb), qb) in model.blocks().iter().zip(p.blocks()).zip(q.blocks()) {
        let ran_p = range_basis(pb)?;
        let ran_q = range_basis(qb)?;
        let forward = kernel_dimension(qb, &ran_p, tol);
        let backward = kernel_dimension(pb, &ran_q, tol);
        total += block.weight * (forward as f64 - backward as f64);
    }
    Ok(total)
}

/// `τ[f(P−Q)] / f(1)` for an odd continuous `f`.
pub fn relative_index_formula<F: Fn(f64) -> f64>(
    model: &SemifiniteModel,
    p: &BlockOperator,
    q: &BlockOperator,
    f: F,
    f1: f64,
) -> Result<f64> {
    if f1 == 0.0 || !f1.is_finite() {
        return Err(Error::InvalidParameter("f(1) must be non-zero".into()));
    }
    for x in [0.1, 0.37, 0.5, 0.83, 1.0] {
        let (a, b) = (f(x), f(-x));
        if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::InvalidParameter(format!("f is not odd at x = {x}")));
        }
    }
    model.check(p)?;
    model.check(q)?;
    check_projection(p)?;
    check_projection(q)?;
    let diff = p - q;
    let eig = EigenDecomposition::new(&diff)?;
    Ok(eig.trace_of(&model.weights(), f) / f1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::OperatorPath;

    #[test]
    fn single_crossing() {
        let m = SemifiniteModel::single(1, 1.0).unwrap();
        let a = BlockOperator::from_real_diagonal(&[vec![-0.5]]);
        let b = BlockOperator::from_real_diagonal(&[vec![0.5]]);
        let path = OperatorPath::between(&a, &b).unwrap();
        let r = sf_oracle(&m, &path, &FlowConfig::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.partition_sum, 1.0);
    }

    #[test]
    fn weighted_crossing_is_fractional() {
        let m = SemifiniteModel::new([(1, 1.0), (1, 0.5)]).unwrap();
        let a = BlockOperator::from_real_diagonal(&[vec![-0.5], vec![-0.5]]);
        let b = BlockOperator::from_real_diagonal(&[vec![0.5], vec![0.5]]);
        let path = OperatorPath::between(&a, &b).unwrap();
        let r = sf_oracle(&m, &path, &FlowConfig::default()).unwrap();
        assert_eq!(r.value, 1.5);
    }

    #[test]
    fn relative_index_examples() {
        let m = SemifiniteModel::single(1, 0.5).unwrap();
        let p = BlockOperator::from_real_diagonal(&[vec![1.0]]);
        let q = BlockOperator::from_real_diagonal(&[vec![0.0]]);
        assert_eq!(relative_index_exact(&m, &p, &q, 1e-9).unwrap(), 0.5);
        assert_eq!(relative_index_exact(&m, &p, &p, 1e-9).unwrap(), 0.0);
        let idx = relative_index_formula(&m, &p, &q, |x| x, 1.0).unwrap();
        assert!((idx - 0.5).abs() < 1e-15);
        assert!(relative_index_formula(&m, &p, &q, |x| x * x, 1.0).is_err());
    }

    #[test]
    fn non_projection_rejected() {
        let m = SemifiniteModel::single(1, 1.0).unwrap();
        let p = BlockOperator::from_real_diagonal(&[vec![0.5]]);
        assert!(matches!(
            relative_index_exact(&m, &p, &p, 1e-9),
            Err(Error::NotProjection(_))
        ));
    }
}
