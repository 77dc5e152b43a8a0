use super::{MethodConfig, Problem, StepSchedule};

pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq)]
pub struct StepCondition {
    pub name: &'static str,
    pub holds: bool,
    /// First 1-based step index where the condition fails.
    pub first_violation: Option<usize>,
    /// Smallest `cap − lhs` over the checked steps (negative when violated).
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub conditions: Vec<StepCondition>,
    /// `1 − μγ_1/(2β)`, the contraction factor of the Euclidean-like branch.
    pub contraction: f64,
}

impl StepReport {
    /// True when every step condition of the rate analysis holds.
    pub fn valid(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn condition(&self, name: &str) -> Option<&StepCondition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Checks `γ ≤ 1/(2φL)`, `γ(1−α_a−α_b)² ≤ μ/(8L²)` and `2μγ + 4γ²L² ≤ 1` at every step.
pub fn validate_step(cfg: &MethodConfig, prob: &Problem, beta: f64) -> StepReport {
    let (l, mu) = (prob.lipschitz, prob.strong);
    let c = 1.0 - cfg.alpha_a - cfg.alpha_b;
    // constant schedules need a single check; sequences are checked over their entries
    let steps: Vec<(usize, f64)> = match &cfg.schedule {
        StepSchedule::Constant(g) => vec![(1, *g)],
        StepSchedule::Sequence(s) => s.iter().take(cfg.horizon).enumerate().map(|(i, g)| (i + 1, *g)).collect(),
    };
    let check = |name: &'static str, f: &dyn Fn(f64) -> f64| {
        let mut first = None;
        let mut min_slack = f64::INFINITY;
        for &(t, g) in &steps {
            let slack = f(g);
            if slack < -1e-15 && first.is_none() {
                first = Some(t);
            }
            min_slack = min_slack.min(slack);
        }
        StepCondition { name, holds: first.is_none(), first_violation: first, min_slack }
    };
    let conditions = vec![
        check("golden_ratio_cap", &|g| 1.0 / (2.0 * GOLDEN_RATIO * l) - g),
        check("extrapolation_cap", &|g| mu / (8.0 * l * l) - g * c * c),
        check("energy", &|g| 1.0 - 2.0 * mu * g - 4.0 * g * g * l * l),
    ];
    StepReport { conditions, contraction: 1.0 - mu * cfg.gamma(1) / (2.0 * beta) }
}

/// `0.9 × min` of the step caps for the given coefficients.
pub fn default_step(alpha_a: f64, alpha_b: f64, lipschitz: f64, strong: f64) -> f64 {
    let c = 1.0 - alpha_a - alpha_b;
    let mut cap = 1.0 / (2.0 * GOLDEN_RATIO * lipschitz);
    if c > 0.0 {
        cap = cap.min(strong / (8.0 * lipschitz * lipschitz * c * c));
    }
    0.9 * cap
}
