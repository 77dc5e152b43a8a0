use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BregmanKernel;
use crate::domains::Domain;
use crate::error::{check_dim, Error, Result};

/// Number of levels in the geometric sample grid `radius·2^{-k}`.
pub const GRID_LEVELS: i32 = 40;
/// Random feasible directions used by the grid samplers.
pub const RANDOM_DIRECTIONS: usize = 32;

/// Decomposable regularizer `h(x) = Σ θ(x_i)` paired with a feasible domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    kernel: BregmanKernel,
    domain: Domain,
}

impl Regularizer {
    /// Checks that every coordinate range of the domain lies in the kernel's
    /// scalar domain.
    pub fn new(kernel: BregmanKernel, domain: Domain) -> Result<Self> {
        let (klo, khi) = kernel.scalar_domain();
        for i in 0..domain.dim() {
            let (lo, hi) = domain.coordinate_range(i);
            if lo < klo || hi > khi {
                let hint = if matches!(kernel, BregmanKernel::Tsallis { .. }) {
                    " (tsallis needs a bounded box [0, upper])"
                } else {
                    ""
                };
                return Err(Error::UnsupportedPairing(format!(
                    "coordinate {i} ranges over [{lo}, {hi}], outside [{klo}, {khi}] of {}{hint}",
                    kernel.name()
                )));
            }
        }
        Ok(Self { kernel, domain })
    }

    pub fn kernel(&self) -> &BregmanKernel {
        &self.kernel
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn name(&self) -> String {
        self.kernel.name()
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        check_dim(self.dim(), p.len())?;
        if !self.domain.contains(p) {
            let bad = p.iter().enumerate().find(|(i, v)| {
                !self.kernel.contains(**v) || **v < self.domain.lower(*i) || **v > self.domain.upper(*i)
            });
            return Err(match bad {
                Some((_, v)) => Error::Domain { value: *v, domain: format!("{:?}", self.domain.kind()) },
                None => Error::Infeasible(format!("equality residual {:e}", self.domain.equality_residual(p))),
            });
        }
        Ok(())
    }

    /// True when `∇h(x)` exists.
    pub fn in_prox_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.domain.contains(x) && x.iter().all(|v| self.kernel.differentiable_at(*v))
    }

    /// `h(p) = Σ θ(p_i)`.
    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        Ok(p.iter().map(|v| self.kernel.value(*v)).sum())
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                if self.kernel.differentiable_at(*v) {
                    Ok(self.kernel.grad(*v))
                } else {
                    Err(Error::ProxDomain { index: i, value: *v })
                }
            })
            .collect()
    }

    /// `D(p, x) = h(p) − h(x) − ⟨∇h(x), p − x⟩`, summed coordinate-wise.
    pub fn divergence(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(x)?;
        self.divergence_unchecked(p, x)
    }

    /// Divergence without the feasibility checks on `p` and `x`.
    pub(crate) fn divergence_unchecked(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        let mut d = 0.0;
        for (i, (a, b)) in p.iter().zip(x).enumerate() {
            d += self.kernel.divergence(*a, *b).map_err(|e| match e {
                Error::ProxDomain { value, .. } => Error::ProxDomain { index: i, value },
                other => other,
            })?;
        }
        Ok(d)
    }

    /// Analytic Legendre exponent: the coordinate-wise maximum of the kernel's
    /// boundary exponent over coordinates sitting on a boundary of the kernel domain.
    pub fn legendre_exponent_analytic(&self, p: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        let boundary = self.kernel.boundary_exponent().ok_or_else(|| Error::UnsupportedKernel(self.kernel.name()))?;
        let (klo, khi) = self.kernel.scalar_domain();
        let on_boundary = p.iter().any(|&v| {
            // only the steep ends (and the lower end of a non-steep Tsallis kernel) matter
            v == klo || (v == khi && self.kernel.steep_above())
        });
        Ok(if on_boundary { boundary } else { 0.0 })
    }

    /// Largest `2D(p,x)/‖x−p‖^{2(1−α)}` over the geometric sample grid within `radius`.
    pub fn legendre_constant(&self, p: &[f64], radius: f64) -> Result<f64> {
        self.check_point(p)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
        }
        let alpha = match self.legendre_exponent_analytic(p) {
            Ok(a) => a,
            Err(Error::UnsupportedKernel(_)) => crate::analysis::estimate_legendre_exponent(self, p, radius, 0)?,
            Err(e) => return Err(e),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dirs = self.domain.probe_directions(p, &mut rng, RANDOM_DIRECTIONS);
        let mut beta = 0.0f64;
        for d in &dirs {
            for (r, x) in self.ray_samples(p, d, radius) {
                let dv = self.divergence_unchecked(p, &x)?;
                beta = beta.max(2.0 * dv / r.powf(2.0 * (1.0 - alpha)));
            }
        }
        Ok(beta)
    }

    /// Points `p + r·d` on the geometric grid that lie in the prox-domain.
    pub(crate) fn ray_samples(&self, p: &[f64], d: &[f64], radius: f64) -> Vec<(f64, Vec<f64>)> {
        let reach = self.domain.max_step(p, d);
        let top = radius.min(reach);
        let mut out = Vec::new();
        for k in 0..GRID_LEVELS {
            let r = top * 0.5f64.powi(k);
            if r <= 0.0 {
                break;
            }
            let x: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + r * b).collect();
            // clip round-off against the bounds of the ray
            let x: Vec<f64> =
                x.iter().enumerate().map(|(i, v)| v.clamp(self.domain.lower(i), self.domain.upper(i))).collect();
            if x.iter().all(|v| self.kernel.differentiable_at(*v)) {
                let dist = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                if dist > 0.0 {
                    out.push((dist, x));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(kernel: BregmanKernel, dom: Domain) -> Regularizer {
        Regularizer::new(kernel, dom).unwrap()
    }

    #[test]
    fn pairing_validation() {
        assert!(Regularizer::new(BregmanKernel::tsallis(0.5).unwrap(), Domain::orthant(1)).is_err());
        assert!(Regularizer::new(BregmanKernel::tsallis(0.5).unwrap(), Domain::orthant_box(vec![1.0]).unwrap()).is_ok());
        assert!(Regularizer::new(BregmanKernel::tsallis(0.5).unwrap(), Domain::simplex(3).unwrap()).is_ok());
        assert!(Regularizer::new(BregmanKernel::Entropy, Domain::interval(-1.0, 1.0).unwrap()).is_err());
        assert!(Regularizer::new(BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0).unwrap()).is_ok());
        assert!(Regularizer::new(BregmanKernel::Hellinger, Domain::orthant(1)).is_err());
    }

    #[test]
    fn divergence_examples() {
        let e = reg(BregmanKernel::Euclidean, Domain::interval(-10.0, 10.0).unwrap());
        assert_eq!(e.divergence(&[1.0], &[3.0]).unwrap(), 2.0);
        let h = reg(BregmanKernel::Entropy, Domain::orthant(1));
        assert!((h.divergence(&[0.0], &[0.7]).unwrap() - 0.7).abs() < 1e-15);
        let t = reg(BregmanKernel::tsallis(0.5).unwrap(), Domain::orthant_box(vec![1.0]).unwrap());
        assert!((t.divergence(&[0.0], &[0.25]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(h.divergence(&[0.5, 0.0][..1], &[0.0]), Err(Error::ProxDomain { index: 0, .. })));
        assert!(matches!(h.divergence(&[-1.0], &[0.5]), Err(Error::Domain { .. })));
    }

    #[test]
    fn analytic_exponents() {
        let h = reg(BregmanKernel::Entropy, Domain::orthant(1));
        assert_eq!(h.legendre_exponent_analytic(&[0.0]).unwrap(), 0.5);
        assert_eq!(h.legendre_exponent_analytic(&[0.4]).unwrap(), 0.0);
        let t = reg(BregmanKernel::tsallis(0.5).unwrap(), Domain::orthant_box(vec![1.0]).unwrap());
        assert_eq!(t.legendre_exponent_analytic(&[0.0]).unwrap(), 0.75);
        let hel = reg(BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0).unwrap());
        assert_eq!(hel.legendre_exponent_analytic(&[0.3]).unwrap(), 0.0);
        assert_eq!(hel.legendre_exponent_analytic(&[-1.0]).unwrap(), 0.75);
        assert_eq!(hel.legendre_exponent_analytic(&[1.0]).unwrap(), 0.75);
        let e = reg(BregmanKernel::Euclidean, Domain::orthant(2));
        assert_eq!(e.legendre_exponent_analytic(&[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn legendre_constants() {
        let e = reg(BregmanKernel::Euclidean, Domain::orthant(1));
        for p in [0.0, 0.3, 2.0] {
            assert!((e.legendre_constant(&[p], 0.5).unwrap() - 1.0).abs() < 1e-12);
        }
        let h = reg(BregmanKernel::Entropy, Domain::orthant(1));
        assert!((h.legendre_constant(&[0.0], 0.5).unwrap() - 2.0).abs() < 1e-12);
        let t = reg(BregmanKernel::tsallis(0.5).unwrap(), Domain::orthant_box(vec![1.0]).unwrap());
        assert!((t.legendre_constant(&[0.0], 0.5).unwrap() - 4.0).abs() < 1e-12);
    }
}
