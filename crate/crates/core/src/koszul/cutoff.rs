use crate::expr::Expr;
use num_complex::Complex64;

/// Radial bump `ρ(z) = 1 − P((q − a²)/(b² − a²))` in `q = |z − c|²`,
/// where `P(x) = 10x³ − 15x⁴ + 6x⁵` is the quintic smoothstep. It is
/// identically 1 for `|z − c| ≤ a`, 0 for `|z − c| ≥ b`, and `C²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFn {
    pub center: Vec<Complex64>,
    pub inner: f64,
    pub outer: f64,
}

/// Which piece of the cutoff a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Inside,
    Transition,
    Outside,
}

impl CutoffFn {
    pub fn new(center: Vec<Complex64>, inner: f64, outer: f64) -> Result<Self, String> {
        if !(0.0 < inner && inner < outer && outer.is_finite()) {
            return Err(format!("cutoff radii must satisfy 0 < inner < outer, got {inner}, {outer}"));
        }
        Ok(CutoffFn { center, inner, outer })
    }

    fn q(&self, z: &[Complex64]) -> f64 {
        z.iter().zip(&self.center).map(|(a, b)| (a - b).norm_sqr()).sum()
    }

    pub fn region(&self, z: &[Complex64]) -> Region {
        let q = self.q(z);
        if q <= self.inner * self.inner {
            Region::Inside
        } else if q >= self.outer * self.outer {
            Region::Outside
        } else {
            Region::Transition
        }
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        let (a2, b2) = (self.inner * self.inner, self.outer * self.outer);
        let x = ((self.q(z) - a2) / (b2 - a2)).clamp(0.0, 1.0);
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }

    /// Polynomial expression of `ρ` valid on the given region.
    pub fn expr(&self, region: Region) -> Expr {
        match region {
            Region::Inside => Expr::one(),
            Region::Outside => Expr::zero(),
            Region::Transition => {
                let n = self.center.len();
                let q = Expr::sum((0..n).map(|k| {
                    let d = Expr::z(k).sub(&Expr::constant(self.center[k]));
                    d.mul(&d.conj())
                }));
                let (a2, b2) = (self.inner * self.inner, self.outer * self.outer);
                let x = q.sub(&Expr::real(a2)).scale(Complex64::new(1.0 / (b2 - a2), 0.0));
                let p = Expr::sum([x.powi(3).scale(Complex64::new(10.0, 0.0)), x.powi(4).scale(Complex64::new(-15.0, 0.0)), x.powi(5).scale(Complex64::new(6.0, 0.0))]);
                Expr::one().sub(&p)
            }
        }
    }
}
