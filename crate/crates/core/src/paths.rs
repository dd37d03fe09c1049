//! Operator paths `t ↦ D₀ + A(t)` and the bounded transform.

use crate::algebra::BlockOperator;
use crate::calculus::eigen::{frechet_derivative, func_calc, EigenDecomposition};
use crate::calculus::scalar::{bounded, bounded_prime};
use crate::error::{Error, Result};

/// Default relative threshold for deciding that an eigenvalue is zero.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

/// A piecewise-C¹ path of self-adjoint operators with exact derivatives.
pub trait Path {
    fn domain(&self) -> (f64, f64);

    /// Sorted points, endpoints included, between which the path is smooth.
    fn breakpoints(&self) -> Vec<f64>;

    fn evaluate(&self, t: f64) -> Result<BlockOperator>;

    /// Derivative at `t`; one-sided at breakpoints.
    fn derivative(&self, t: f64) -> Result<BlockOperator>;

    fn start(&self) -> Result<BlockOperator> {
        self.evaluate(self.domain().0)
    }

    fn end(&self) -> Result<BlockOperator> {
        self.evaluate(self.domain().1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SegmentKind {
    /// `A` moves linearly from `from` to `to`.
    Linear { from: BlockOperator, to: BlockOperator },
    /// `A = s·(uD₀u* − D₀)` with `s` the local parameter in `[0, 1]`.
    Conjugation {
        unitary: BlockOperator,
        displacement: BlockOperator,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub kind: SegmentKind,
}

impl Segment {
    fn local(&self, t: f64) -> f64 {
        (t - self.start) / (self.end - self.start)
    }

    fn perturbation(&self, t: f64) -> BlockOperator {
        let s = self.local(t);
        match &self.kind {
            SegmentKind::Linear { from, to } => &from.scale(1.0 - s) + &to.scale(s),
            SegmentKind::Conjugation { displacement, .. } => displacement.scale(s),
        }
    }

    fn rate(&self) -> BlockOperator {
        let len = self.end - self.start;
        match &self.kind {
            SegmentKind::Linear { from, to } => (to - from).scale(1.0 / len),
            SegmentKind::Conjugation { displacement, .. } => displacement.scale(1.0 / len),
        }
    }
}

/// `t ↦ D₀ + A(t)` over a partition of its domain into segments.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPath {
    base: BlockOperator,
    segments: Vec<Segment>,
}

fn require_selfadjoint(x: &BlockOperator) -> Result<()> {
    if x.is_selfadjoint() {
        Ok(())
    } else {
        Err(Error::NotSelfAdjoint {
            defect: x.hermitian_defect(),
            norm: x.norm(),
        })
    }
}

impl OperatorPath {
    pub fn new(base: BlockOperator, segments: Vec<Segment>) -> Result<Self> {
        require_selfadjoint(&base)?;
        if segments.is_empty() {
            return Err(Error::InvalidParameter("path needs at least one segment".into()));
        }
        let dims = base.dims();
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.end > seg.start) {
                return Err(Error::InvalidParameter(format!("segment {i} has empty domain")));
            }
            match &seg.kind {
                SegmentKind::Linear { from, to } => {
                    for x in [from, to] {
                        require_selfadjoint(x)?;
                        if x.dims() != dims {
                            return Err(Error::Shape("segment does not match base".into()));
                        }
                    }
                }
                SegmentKind::Conjugation { displacement, .. } => {
                    require_selfadjoint(displacement)?;
                }
            }
            if i > 0 {
                let prev = &segments[i - 1];
                if prev.end != seg.start {
                    return Err(Error::InvalidParameter(format!("gap before segment {i}")));
                }
                let jump = prev.perturbation(prev.end).distance(&seg.perturbation(seg.start));
                let scale = 1.0 + prev.perturbation(prev.end).norm();
                if jump > 1e-12 * scale {
                    return Err(Error::Discontinuous(seg.start));
                }
            }
        }
        Ok(Self { base, segments })
    }

    /// `D_t = D₀ + (1-t)A₀ + tA₁` on `[0, 1]`.
    pub fn linear(base: BlockOperator, from: BlockOperator, to: BlockOperator) -> Result<Self> {
        Self::new(
            base,
            vec![Segment {
                start: 0.0,
                end: 1.0,
                kind: SegmentKind::Linear { from, to },
            }],
        )
    }

    /// The straight line from `D_a` to `D_b` on `[0, 1]`.
    pub fn between(da: &BlockOperator, db: &BlockOperator) -> Result<Self> {
        require_selfadjoint(da)?;
        require_selfadjoint(db)?;
        let zero = BlockOperator::zeros(&da.dims());
        Self::linear(da.clone(), zero, db - da)
    }

    pub fn constant(base: BlockOperator) -> Result<Self> {
        let zero = BlockOperator::zeros(&base.dims());
        Self::linear(base, zero.clone(), zero)
    }

    /// Piecewise-linear `A` interpolating `values` at `knots`.
    pub fn piecewise_linear(base: BlockOperator, knots: &[f64], values: &[BlockOperator]) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::InvalidParameter("need matching knots and values, at least two".into()));
        }
        let segments = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(k, v)| Segment {
                start: k[0],
                end: k[1],
                kind: SegmentKind::Linear {
                    from: v[0].clone(),
                    to: v[1].clone(),
                },
            })
            .collect();
        Self::new(base, segments)
    }

    /// Polygonal path through the given operators with equally spaced knots on `[0, 1]`.
    pub fn through(points: &[BlockOperator]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("need at least two points".into()));
        }
        let base = points[0].clone();
        let n = points.len() - 1;
        let knots: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let values: Vec<BlockOperator> = points.iter().map(|p| p - &base).collect();
        Self::piecewise_linear(base, &knots, &values)
    }

    /// `D_t = D₀ + t(uD₀u* − D₀)` on `[0, 1]`.
    pub fn conjugation(base: BlockOperator, unitary: BlockOperator) -> Result<Self> {
        require_selfadjoint(&base)?;
        if unitary.dims() != base.dims() {
            return Err(Error::Shape("unitary does not match base".into()));
        }
        let defect = unitary.unitary_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!("operator is not unitary (defect {defect:.3e})")));
        }
        let displacement = &unitary.sandwich(&base) - &base;
        Self::new(
            base,
            vec![Segment {
                start: 0.0,
                end: 1.0,
                kind: SegmentKind::Conjugation {
                    unitary,
                    displacement,
                },
            }],
        )
    }

    pub fn base(&self) -> &BlockOperator {
        &self.base
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// The unitary of a single-segment conjugation path.
    pub fn conjugating_unitary(&self) -> Option<&BlockOperator> {
        match self.segments.as_slice() {
            [Segment {
                kind: SegmentKind::Conjugation { unitary, .. },
                ..
            }] => Some(unitary),
            _ => None,
        }
    }

    fn segment_at(&self, t: f64) -> Result<&Segment> {
        let (a, b) = self.domain();
        if !(t >= a && t <= b) {
            return Err(Error::InvalidParameter(format!("t = {t} outside [{a}, {b}]")));
        }
        Ok(self
            .segments
            .iter()
            .find(|s| t < s.end)
            .unwrap_or_else(|| self.segments.last().expect("non-empty")))
    }

    /// The two halves of the path on either side of an interior point `t`.
    pub fn split_at(&self, t: f64) -> Result<(Self, Self)> {
        let (a, b) = self.domain();
        if !(t > a && t < b) {
            return Err(Error::InvalidParameter(format!("split point {t} not interior")));
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        for seg in &self.segments {
            if seg.end <= t {
                left.push(seg.clone());
            } else if seg.start >= t {
                right.push(seg.clone());
            } else {
                let at = seg.perturbation(t);
                let (l, r) = match &seg.kind {
                    SegmentKind::Linear { from, to } => (
                        SegmentKind::Linear {
                            from: from.clone(),
                            to: at.clone(),
                        },
                        SegmentKind::Linear {
                            from: at,
                            to: to.clone(),
                        },
                    ),
                    SegmentKind::Conjugation { displacement, .. } => (
                        SegmentKind::Linear {
                            from: seg.perturbation(seg.start),
                            to: at.clone(),
                        },
                        SegmentKind::Linear {
                            from: at,
                            to: displacement.clone(),
                        },
                    ),
                };
                left.push(Segment {
                    start: seg.start,
                    end: t,
                    kind: l,
                });
                right.push(Segment {
                    start: t,
                    end: seg.end,
                    kind: r,
                });
            }
        }
        Ok((
            Self::new(self.base.clone(), left)?,
            Self::new(self.base.clone(), right)?,
        ))
    }
}

impl Path for OperatorPath {
    fn domain(&self) -> (f64, f64) {
        (self.segments[0].start, self.segments.last().expect("non-empty").end)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        pts.push(self.domain().1);
        pts
    }

    fn evaluate(&self, t: f64) -> Result<BlockOperator> {
        let seg = self.segment_at(t)?;
        Ok(&self.base + &seg.perturbation(t))
    }

    fn derivative(&self, t: f64) -> Result<BlockOperator> {
        Ok(self.segment_at(t)?.rate())
    }
}

/// A path of bounded operators `F_t`.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundedPath {
    /// The `F_t` are given directly as an affine path.
    Affine(OperatorPath),
    /// `F_t = D_t(1+D_t²)^{-1/2}` for an operator path `D_t`.
    Transformed(OperatorPath),
}

impl Path for BoundedPath {
    fn domain(&self) -> (f64, f64) {
        match self {
            Self::Affine(p) | Self::Transformed(p) => p.domain(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Affine(p) | Self::Transformed(p) => p.breakpoints(),
        }
    }

    fn evaluate(&self, t: f64) -> Result<BlockOperator> {
        match self {
            Self::Affine(p) => p.evaluate(t),
            Self::Transformed(p) => bounded_transform(&p.evaluate(t)?),
        }
    }

    fn derivative(&self, t: f64) -> Result<BlockOperator> {
        match self {
            Self::Affine(p) => p.derivative(t),
            Self::Transformed(p) => frechet_derivative(&p.evaluate(t)?, &p.derivative(t)?, bounded, bounded_prime),
        }
    }
}

/// `F = D(1+D²)^{-1/2}`.
pub fn bounded_transform(d: &BlockOperator) -> Result<BlockOperator> {
    func_calc(d, bounded)
}

/// The bounded path `F_t = D_t(1+D_t²)^{-1/2}`.
pub fn transform_path(path: &OperatorPath) -> BoundedPath {
    BoundedPath::Transformed(path.clone())
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s = {s} must be positive")));
    }
    Ok(())
}

/// `F_s = D(s+D²)^{-1/2}`.
pub fn eta_family(d: &BlockOperator, s: f64) -> Result<BlockOperator> {
    check_s(s)?;
    func_calc(d, |x| x / (s + x * x).sqrt())
}

/// `dF_s/ds = -½F_s(s+D²)^{-1}`.
pub fn eta_family_derivative(d: &BlockOperator, s: f64) -> Result<BlockOperator> {
    check_s(s)?;
    func_calc(d, |x| -0.5 * x * (s + x * x).powf(-1.5))
}

/// `sign(F)` with eigenvalues within `kernel_tol·‖F‖` of zero sent to `+1`.
pub fn sign_endpoint(f: &BlockOperator, kernel_tol: f64) -> Result<BlockOperator> {
    let eig = EigenDecomposition::new(f)?;
    let thr = kernel_tol * eig.max_abs_eigenvalue();
    Ok(eig.apply(|x| if x >= -thr { 1.0 } else { -1.0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;
    use crate::SemifiniteModel;

    #[test]
    fn transform_examples() {
        let z = BlockOperator::from_real_diagonal(&[vec![0.0]]);
        assert_eq!(bounded_transform(&z).unwrap().max_abs(), 0.0);
        let one = BlockOperator::from_real_diagonal(&[vec![1.0]]);
        let f = bounded_transform(&one).unwrap();
        assert!((f.block(0)[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sign_endpoint_example() {
        let f = BlockOperator::from_real_diagonal(&[vec![0.5, -0.5, 0.0]]);
        let s = sign_endpoint(&f, DEFAULT_KERNEL_TOL).unwrap();
        let e = BlockOperator::from_real_diagonal(&[vec![1.0, -1.0, 1.0]]);
        assert!(s.distance(&e) < 1e-15);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let model = SemifiniteModel::new([(3, 1.0), (2, 0.5)]).unwrap();
        let mut s = Sampler::new(9);
        let pts: Vec<_> = (0..4).map(|_| s.hermitian(&model, 1.0)).collect();
        let path = OperatorPath::through(&pts).unwrap();
        let t = 0.4;
        let h = 1e-6;
        let fd = (&path.evaluate(t + h).unwrap() - &path.evaluate(t - h).unwrap()).scale(0.5 / h);
        assert!(fd.distance(&path.derivative(t).unwrap()) < 1e-8);
    }

    #[test]
    fn split_reassembles() {
        let model = SemifiniteModel::single(3, 1.0).unwrap();
        let mut s = Sampler::new(2);
        let d = s.hermitian(&model, 1.0);
        let u = s.unitary(&model);
        let path = OperatorPath::conjugation(d, u).unwrap();
        let (l, r) = path.split_at(0.3).unwrap();
        assert!(l.end().unwrap().distance(&r.start().unwrap()) < 1e-14);
        assert!(r.end().unwrap().distance(&path.end().unwrap()) < 1e-14);
        assert!(l.evaluate(0.1).unwrap().distance(&path.evaluate(0.1).unwrap()) < 1e-14);
    }

    #[test]
    fn discontinuity_is_rejected() {
        let a = BlockOperator::from_real_diagonal(&[vec![0.0]]);
        let b = BlockOperator::from_real_diagonal(&[vec![1.0]]);
        let segs = vec![
            Segment {
                start: 0.0,
                end: 0.5,
                kind: SegmentKind::Linear { from: a.clone(), to: b.clone() },
            },
            Segment {
                start: 0.5,
                end: 1.0,
                kind: SegmentKind::Linear { from: a.clone(), to: b },
            },
        ];
        assert!(matches!(OperatorPath::new(a, segs), Err(Error::Discontinuous(_))));
    }
}
