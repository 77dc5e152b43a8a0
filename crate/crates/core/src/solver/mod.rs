//! The two-stage Bregman proximal recursion with mirror descent, mirror-prox
//! and optimistic presets.

mod energy;
mod run;
mod step;

pub use energy::{energy_series, template_slacks, EnergyReport};
pub use run::{bpm_step, fmt_f64, run, StopReason, Trajectory};
pub use step::{default_step, validate_step, StepCondition, StepReport, GOLDEN_RATIO};

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::domains::Domain;
use crate::error::{check_dim, Error, Result};
use crate::field::VectorField;

/// Default early-stop threshold on `D(x*, X_t)`.
pub const EARLY_STOP: f64 = 1e-28;

/// Variational inequality data.
#[derive(Clone)]
pub struct Problem {
    pub domain: Domain,
    pub field: Arc<dyn VectorField>,
    pub solution: Option<Vec<f64>>,
    /// Lipschitz modulus `L` of the field.
    pub lipschitz: f64,
    /// Strong monotonicity modulus `μ` around the solution.
    pub strong: f64,
    /// Radius of the neighborhood where `μ` is valid.
    pub radius: f64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("domain", &self.domain)
            .field("field", &self.field.describe())
            .field("solution", &self.solution)
            .field("lipschitz", &self.lipschitz)
            .field("strong", &self.strong)
            .field("radius", &self.radius)
            .finish()
    }
}

impl Problem {
    pub fn new(domain: Domain, field: Arc<dyn VectorField>, lipschitz: f64, strong: f64) -> Result<Self> {
        check_dim(domain.dim(), field.dim())?;
        if !(lipschitz > 0.0) || !(strong > 0.0) {
            return Err(Error::InvalidArgument(format!("need L > 0 and μ > 0, got L={lipschitz}, μ={strong}")));
        }
        Ok(Self { domain, field, solution: None, lipschitz, strong, radius: f64::INFINITY })
    }

    pub fn with_solution(mut self, x_star: Vec<f64>) -> Result<Self> {
        self.domain.check_feasible(&x_star)?;
        self.solution = Some(x_star);
        Ok(self)
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.field.eval(x)
    }

    /// Largest observed `‖F(x′) − F(x)‖ / (L‖x′ − x‖)` over random feasible pairs.
    pub fn lipschitz_spot_check<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let a = self.domain.sample_interior(rng);
            let b = self.domain.sample_interior(rng);
            let d = dist(&a, &b);
            if d > 0.0 {
                worst = worst.max(dist(&self.eval(&a), &self.eval(&b)) / (self.lipschitz * d));
            }
        }
        worst
    }

    /// Smallest observed `⟨F(x) − F(x*), x − x*⟩ / (μ‖x − x*‖²)` on random points
    /// within the declared neighborhood.
    pub fn monotonicity_spot_check<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> Option<f64> {
        let xs = self.solution.as_ref()?;
        let fs = self.eval(xs);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let mut x = self.domain.sample_interior(rng);
            let r = dist(&x, xs);
            if r > self.radius {
                let s = self.radius / r * rng.random_range(0.0..1.0);
                x = xs.iter().zip(&x).map(|(a, b)| a + s * (b - a)).collect();
            }
            let d2 = dist(&x, xs).powi(2);
            if d2 > 0.0 {
                let fx = self.eval(&x);
                let inner: f64 = (0..x.len()).map(|i| (fx[i] - fs[i]) * (x[i] - xs[i])).sum();
                worst = worst.min(inner / (self.strong * d2));
            }
        }
        Some(worst)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Step-size schedule; a sequence repeats its last entry past its end.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    Sequence(Vec<f64>),
}

impl StepSchedule {
    /// `γ_t` for 1-based `t`.
    pub fn at(&self, t: usize) -> f64 {
        match self {
            StepSchedule::Constant(g) => *g,
            StepSchedule::Sequence(s) => s[(t.max(1) - 1).min(s.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            StepSchedule::Constant(g) => g.is_finite() && *g >= 0.0,
            StepSchedule::Sequence(s) => !s.is_empty() && s.iter().all(|g| g.is_finite() && *g >= 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("step sizes must be finite and nonnegative".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    MirrorDescent,
    MirrorProx,
    Optimistic,
}

impl Preset {
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            Preset::MirrorDescent => (0.0, 0.0),
            Preset::MirrorProx => (1.0, 0.0),
            Preset::Optimistic => (0.0, 1.0),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "md" | "mirror_descent" => Ok(Preset::MirrorDescent),
            "mp" | "mirror_prox" => Ok(Preset::MirrorProx),
            "omd" | "optimistic" => Ok(Preset::Optimistic),
            other => Err(Error::InvalidArgument(format!("unknown method preset `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::MirrorDescent => "md",
            Preset::MirrorProx => "mp",
            Preset::Optimistic => "omd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub schedule: StepSchedule,
    pub horizon: usize,
    pub init: Vec<f64>,
    /// Stop once `0 < D(x*, X_t) <` this value; `None` runs the full horizon.
    pub early_stop: Option<f64>,
}

impl MethodConfig {
    pub fn new(alpha_a: f64, alpha_b: f64, schedule: StepSchedule, horizon: usize, init: Vec<f64>) -> Result<Self> {
        let cfg = Self { alpha_a, alpha_b, schedule, horizon, init, early_stop: Some(EARLY_STOP) };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn preset(preset: Preset, gamma: f64, horizon: usize, init: Vec<f64>) -> Result<Self> {
        let (a, b) = preset.coefficients();
        Self::new(a, b, StepSchedule::Constant(gamma), horizon, init)
    }

    pub fn mirror_descent(gamma: f64, horizon: usize, init: Vec<f64>) -> Result<Self> {
        Self::preset(Preset::MirrorDescent, gamma, horizon, init)
    }

    pub fn mirror_prox(gamma: f64, horizon: usize, init: Vec<f64>) -> Result<Self> {
        Self::preset(Preset::MirrorProx, gamma, horizon, init)
    }

    pub fn optimistic(gamma: f64, horizon: usize, init: Vec<f64>) -> Result<Self> {
        Self::preset(Preset::Optimistic, gamma, horizon, init)
    }

    pub fn with_early_stop(mut self, threshold: Option<f64>) -> Self {
        self.early_stop = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.alpha_a, self.alpha_b);
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!("coefficients ({a}, {b}) must lie in [0, 1]")));
        }
        if a + b > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!("alpha_a + alpha_b = {} exceeds 1", a + b)));
        }
        if b > 0.0 && (a + b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("alpha_b > 0 requires alpha_a + alpha_b = 1, got {}", a + b)));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        self.schedule.validate()
    }

    pub fn gamma(&self, t: usize) -> f64 {
        self.schedule.at(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AffineField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficient_rules() {
        assert!(MethodConfig::new(0.5, 0.5, StepSchedule::Constant(0.1), 10, vec![0.5]).is_ok());
        assert!(MethodConfig::new(0.3, 0.5, StepSchedule::Constant(0.1), 10, vec![0.5]).is_err());
        assert!(MethodConfig::new(0.7, 0.0, StepSchedule::Constant(0.1), 10, vec![0.5]).is_ok());
        assert!(MethodConfig::new(0.7, 0.7, StepSchedule::Constant(0.1), 10, vec![0.5]).is_err());
        assert!(MethodConfig::new(0.0, 0.0, StepSchedule::Sequence(vec![]), 10, vec![0.5]).is_err());
    }

    #[test]
    fn schedule_repeats_last() {
        let s = StepSchedule::Sequence(vec![0.3, 0.2]);
        assert_eq!(s.at(1), 0.3);
        assert_eq!(s.at(2), 0.2);
        assert_eq!(s.at(50), 0.2);
    }

    #[test]
    fn spot_checks() {
        let dom = Domain::orthant(2);
        let f = AffineField::new(vec![vec![1.0, 1.0], vec![-1.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let p = Problem::new(dom, Arc::new(f), 2f64.sqrt(), 1.0).unwrap().with_solution(vec![0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(p.lipschitz_spot_check(&mut rng, 500) <= 1.0 + 1e-12);
        assert!(p.monotonicity_spot_check(&mut rng, 500).unwrap() >= 1.0 - 1e-12);
    }
}
