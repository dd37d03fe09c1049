//! Divided differences of `e^{-x}` and simplex-exponential chain integrals.

use num_complex::Complex64;

use super::eigen::EigenDecomposition;
use crate::algebra::{BlockOperator, SemifiniteModel};
use crate::error::{Error, Result};
use crate::Mat;

/// Longest chain accepted by the index-contraction routines.
pub const MAX_CHAIN: usize = 5;

/// Node spread below which a cluster is handled by a shifted Taylor series.
const CLUSTER_SPREAD: f64 = 0.5;

/// Divided difference of `e^{-x}` over a cluster of nearby (sorted) nodes.
///
/// With `c` the mean and `y_k = a_k - c`, the n-th divided difference of
/// `y^m` is the complete homogeneous polynomial `h_{m-n}(y)`, so
/// `f[a_0..a_n] = e^{-c} Σ_{m≥n} (-1)^m h_{m-n}(y) / m!`.
fn taylor_cluster(a: &[f64]) -> f64 {
    let n = a.len() - 1;
    let c = a.iter().sum::<f64>() / a.len() as f64;
    let y: Vec<f64> = a.iter().map(|v| v - c).collect();
    const TERMS: usize = 40;
    // h[j] = h_j(y_0..y_k), updated one variable at a time.
    let mut h = vec![0.0; TERMS];
    h[0] = 1.0;
    for (k, &yk) in y.iter().enumerate() {
        if k == 0 {
            for j in 1..TERMS {
                h[j] = h[j - 1] * yk;
            }
        } else {
            for j in 1..TERMS {
                h[j] += yk * h[j - 1];
            }
        }
    }
    let mut inv_fact = 1.0;
    for m in 1..=n {
        inv_fact /= m as f64;
    }
    let mut sum = 0.0;
    for j in 0..TERMS {
        let m = n + j;
        if j > 0 {
            inv_fact /= m as f64;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * h[j] * inv_fact;
    }
    (-c).exp() * sum
}

/// The divided difference `f[a_0, …, a_n]` of `f(x) = e^{-x}`.
///
/// `(-1)^n` times this value is `∫_{Δ_n} e^{-Σ t_j a_j} dt`.
pub fn divided_difference_exp(nodes: &[f64]) -> f64 {
    assert!(!nodes.is_empty(), "at least one node required");
    let mut a = nodes.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let mut prev: Vec<f64> = a.iter().map(|x| (-x).exp()).collect();
    for len in 2..=n {
        let cur: Vec<f64> = (0..=n - len)
            .map(|i| {
                let j = i + len - 1;
                let spread = a[j] - a[i];
                if spread <= CLUSTER_SPREAD {
                    taylor_cluster(&a[i..=j])
                } else {
                    (prev[i + 1] - prev[i]) / spread
                }
            })
            .collect();
        prev = cur;
    }
    prev[0]
}

/// `∫_{Δ_n} e^{-Σ t_j a_j} dt`.
pub fn simplex_weight(nodes: &[f64]) -> f64 {
    let d = divided_difference_exp(nodes);
    if nodes.len() % 2 == 1 {
        d
    } else {
        -d
    }
}

fn check_chain(model: &SemifiniteModel, a: &BlockOperator, bs: &[BlockOperator]) -> Result<()> {
    if bs.len() > MAX_CHAIN {
        return Err(Error::ChainTooLong {
            len: bs.len(),
            max: MAX_CHAIN,
        });
    }
    model.check(a)?;
    for b in bs {
        model.check(b)?;
    }
    Ok(())
}

/// Sums `Π B̃_k[i_{k-1}, i_k] · weight(a_{i_0}, …, a_{i_n})` over index chains,
/// with the closing factor supplied by `close(i_0, i_n)`.
fn contract<C>(vals: &[f64], bs: &[Mat], close: C, free_end: bool) -> Complex64
where
    C: Fn(usize, usize) -> Complex64,
{
    let dim = vals.len();
    let n = bs.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; n + 1];
    let mut nodes = vec![0.0; n + 1];
    fn walk<C: Fn(usize, usize) -> Complex64>(
        depth: usize,
        prod: Complex64,
        ctx: &mut (Vec<usize>, Vec<f64>, Complex64),
        vals: &[f64],
        bs: &[Mat],
        close: &C,
        free_end: bool,
    ) {
        let n = bs.len();
        if depth == n {
            let i0 = ctx.0[0];
            let last = ctx.0[n];
            let c = close(i0, last);
            if c == Complex64::new(0.0, 0.0) {
                return;
            }
            let w = simplex_weight(&ctx.1);
            ctx.2 += prod * c * w;
            return;
        }
        let from = ctx.0[depth];
        let b = &bs[depth];
        let range: Vec<usize> = if depth + 1 == n && !free_end {
            vec![ctx.0[0]]
        } else {
            (0..vals.len()).collect()
        };
        for j in range {
            let v = b[(from, j)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            ctx.0[depth + 1] = j;
            ctx.1[depth + 1] = vals[j];
            walk(depth + 1, prod * v, ctx, vals, bs, close, free_end);
        }
    }
    for i0 in 0..dim {
        idx[0] = i0;
        nodes[0] = vals[i0];
        if n == 0 {
            let c = close(i0, i0);
            total += c * (-vals[i0]).exp();
            continue;
        }
        let mut ctx = (idx.clone(), nodes.clone(), Complex64::new(0.0, 0.0));
        walk(0, Complex64::new(1.0, 0.0), &mut ctx, vals, bs, &close, free_end);
        total += ctx.2;
    }
    total
}

/// `τ(∫_{Δ_n} e^{-t_0 A} B_1 e^{-t_1 A} ⋯ B_n e^{-t_n A} dt)` for self-adjoint `A`.
pub fn simplex_exp_chain(model: &SemifiniteModel, a: &BlockOperator, bs: &[BlockOperator]) -> Result<Complex64> {
    check_chain(model, a, bs)?;
    let eig = EigenDecomposition::new(a)?;
    let rotated: Vec<Vec<Mat>> = bs.iter().map(|b| eig.to_eigenbasis(b).into_blocks()).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (k, block) in model.blocks().iter().enumerate() {
        let chain: Vec<Mat> = rotated.iter().map(|r| r[k].clone()).collect();
        let one = |i: usize, j: usize| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        total += contract(&eig.values()[k], &chain, one, false) * block.weight;
    }
    Ok(total)
}

/// `τ(L ∫_{Δ_n} e^{-t_0 A} B_1 e^{-t_1 A} ⋯ B_n e^{-t_n A} dt)` with a leading factor `L`.
pub fn simplex_exp_chain_led(
    model: &SemifiniteModel,
    lead: &BlockOperator,
    a: &BlockOperator,
    bs: &[BlockOperator],
) -> Result<Complex64> {
    check_chain(model, a, bs)?;
    model.check(lead)?;
    let eig = EigenDecomposition::new(a)?;
    let lead = eig.to_eigenbasis(lead);
    let rotated: Vec<Vec<Mat>> = bs.iter().map(|b| eig.to_eigenbasis(b).into_blocks()).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (k, block) in model.blocks().iter().enumerate() {
        let chain: Vec<Mat> = rotated.iter().map(|r| r[k].clone()).collect();
        let l = lead.block(k);
        total += contract(&eig.values()[k], &chain, |i0, last| l[(last, i0)], true) * block.weight;
    }
    Ok(total)
}

/// A block upper-triangular matrix whose entry `(i, i+d)` depends only on
/// `d` and `i mod p`, stored as `seq[i mod p][d]`.
struct PeriodicTriangular {
    seq: Vec<Vec<Mat>>,
}

impl PeriodicTriangular {
    fn identity(p: usize, len: usize, n: usize) -> Self {
        let seq = (0..p)
            .map(|_| {
                let mut v = vec![Mat::zeros(n, n); len];
                v[0] = Mat::identity(n, n);
                v
            })
            .collect();
        Self { seq }
    }

    fn period(&self) -> usize {
        self.seq.len()
    }

    fn len(&self) -> usize {
        self.seq[0].len()
    }

    /// Product with the bidiagonal matrix `diag(d) + super(sup[i mod p])`.
    fn mul_bidiagonal(&self, diag: &Mat, sup: &[Mat]) -> Self {
        let p = self.period();
        let seq = (0..p)
            .map(|r| {
                (0..self.len())
                    .map(|d| {
                        let mut x = &self.seq[r][d] * diag;
                        if d > 0 {
                            x += &self.seq[r][d - 1] * &sup[(r + d - 1) % p];
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        Self { seq }
    }

    /// `self²`, keeping only the residues in `0..rows`.
    fn square(&self, rows: usize) -> Self {
        let p = self.period();
        let len = self.len();
        let n = self.seq[0][0].nrows();
        let one = Complex64::new(1.0, 0.0);
        let seq = (0..rows)
            .map(|r| {
                (0..len)
                    .map(|d| {
                        let mut x = Mat::zeros(n, n);
                        for m in 0..=d {
                            x.gemm(one, &self.seq[r][m], &self.seq[(r + m) % p][d - m], one);
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        Self { seq }
    }

    fn add_scaled(&mut self, other: &Self, s: f64) {
        for (a, b) in self.seq.iter_mut().zip(&other.seq) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * Complex64::new(s, 0.0);
            }
        }
    }
}

/// `exp` of the block bidiagonal matrix with `-a` on the diagonal and
/// `pattern[i mod p]` above row `i`, by scaling and squaring on the
/// periodic triangular representation. Returns the first block row.
fn bidiagonal_exp_row(a: &Mat, pattern: &[Mat], len: usize) -> Vec<Mat> {
    let n = a.nrows();
    let row_sum = |m: &Mat| (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let norm = row_sum(a) + pattern.iter().map(row_sum).fold(0.0, f64::max);
    let squarings = if norm > 1.0 { norm.log2().ceil() as i32 } else { 0 };
    let scale = Complex64::new(0.5f64.powi(squarings), 0.0);
    let diag = a * (-scale);
    let sup: Vec<Mat> = pattern.iter().map(|b| b * scale).collect();
    let p = pattern.len();
    let mut sum = PeriodicTriangular::identity(p, len, n);
    let mut term = PeriodicTriangular::identity(p, len, n);
    const TAYLOR_TERMS: usize = 30;
    for j in 1..=TAYLOR_TERMS {
        term = term.mul_bidiagonal(&diag, &sup);
        for v in term.seq.iter_mut().flatten() {
            *v /= Complex64::new(j as f64, 0.0);
        }
        sum.add_scaled(&term, 1.0);
    }
    for i in 0..squarings {
        let rows = if i + 1 == squarings { 1 } else { p };
        sum = sum.square(rows);
    }
    sum.seq.swap_remove(0)
}

/// The chain integrals `Y_o = ∫_{Δ_o} e^{-t_0 A} B_1 e^{-t_1 A} ⋯ B_o e^{-t_o A} dt`
/// for `o = 0..=order`, where `B_j` cycles through `pattern`.
///
/// All of them are read off the first block row of `exp(M)`, where `M` is
/// block upper bidiagonal with `-A` on the diagonal and `B_j` above it.
pub fn alternating_chain_integrals(
    a: &BlockOperator,
    pattern: &[BlockOperator],
    order: usize,
) -> Vec<BlockOperator> {
    assert!(!pattern.is_empty(), "pattern must be non-empty");
    let per_block: Vec<Vec<Mat>> = (0..a.dims().len())
        .map(|k| {
            let pat: Vec<Mat> = pattern.iter().map(|b| b.block(k).clone()).collect();
            bidiagonal_exp_row(a.block(k), &pat, order + 1)
        })
        .collect();
    (0..=order)
        .map(|o| BlockOperator::new(per_block.iter().map(|v| v[o].clone()).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;

    #[test]
    fn single_node() {
        assert!((divided_difference_exp(&[0.7]) - (-0.7f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn two_nodes() {
        let d = divided_difference_exp(&[0.0, 1.0]);
        assert!((d - (-0.632_120_558_828_557_7)).abs() < 1e-15);
    }

    #[test]
    fn confluent_triple() {
        let d = divided_difference_exp(&[1.0, 1.0, 1.0]);
        assert!((d - 0.183_939_720_585_721_2).abs() < 1e-15);
    }

    #[test]
    fn cluster_and_recursion_agree_at_threshold() {
        // f[0, 0.3, 0.5] to 20 digits; the two evaluations straddle the
        // cluster cutoff and must bracket it symmetrically.
        let reference = 0.385_002_919_097_703_136_3;
        let a = divided_difference_exp(&[0.0, 0.3, CLUSTER_SPREAD - 1e-9]);
        let b = divided_difference_exp(&[0.0, 0.3, CLUSTER_SPREAD + 1e-9]);
        assert!((0.5 * (a + b) - reference).abs() < 1e-15);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariance() {
        let nodes = [2.0, 0.1, 0.1 + 1e-7, 3.5, 0.7];
        let d = divided_difference_exp(&nodes);
        let perm = [3.5, 0.1 + 1e-7, 0.7, 2.0, 0.1];
        assert!((divided_difference_exp(&perm) - d).abs() <= 1e-14 * d.abs());
    }

    #[test]
    fn one_by_one_chain_of_identities() {
        let model = SemifiniteModel::single(1, 1.0).unwrap();
        let a = BlockOperator::from_real_diagonal(&[vec![0.8]]);
        let id = model.identity();
        for n in 0..=MAX_CHAIN {
            let bs = vec![id.clone(); n];
            let v = simplex_exp_chain(&model, &a, &bs).unwrap();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((v.re - (-0.8f64).exp() / fact).abs() < 1e-14, "n = {n}");
        }
        let too_long = vec![id; MAX_CHAIN + 1];
        assert!(matches!(
            simplex_exp_chain(&model, &a, &too_long),
            Err(Error::ChainTooLong { .. })
        ));
    }

    #[test]
    fn block_exponential_matches_contraction() {
        let model = SemifiniteModel::new([(3, 1.0), (2, 0.6)]).unwrap();
        let mut s = Sampler::new(21);
        let d = s.hermitian(&model, 1.5);
        let a = (&d * &d).assume_hermitian();
        let b1 = s.complex(&model, 0.7);
        let b2 = s.complex(&model, 0.7);
        let lead = s.unitary(&model);
        let ys = alternating_chain_integrals(&a, &[b1.clone(), b2.clone()], 4);
        let cycle = [b1, b2];
        for (o, y) in ys.iter().enumerate() {
            let bs: Vec<BlockOperator> = (0..o).map(|j| cycle[j % 2].clone()).collect();
            let direct = simplex_exp_chain_led(&model, &lead, &a, &bs).unwrap();
            let via_exp = model.trace(&(&lead * y)).unwrap();
            assert!((direct - via_exp).norm() < 1e-12, "order {o}: {direct} vs {via_exp}");
        }
    }
}
