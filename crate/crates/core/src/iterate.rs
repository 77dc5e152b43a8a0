/// A point of the prox-domain, optionally carrying `ln x_i` so that entropic
/// coordinates can keep decaying after `x_i` underflows.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub log_x: Option<Vec<f64>>,
}

impl Iterate {
    pub fn new(x: Vec<f64>) -> Self {
        Self { x, log_x: None }
    }

    /// Builds the point from log-coordinates.
    pub fn from_logs(log_x: Vec<f64>) -> Self {
        Self { x: log_x.iter().map(|l| l.exp()).collect(), log_x: Some(log_x) }
    }

    /// Attaches logs computed from the current coordinates.
    pub fn with_logs(mut self) -> Self {
        self.log_x = Some(self.x.iter().map(|v| v.ln()).collect());
        self
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `ln x_i`, exact even when `x_i` has underflowed.
    pub fn ln(&self, i: usize) -> f64 {
        match &self.log_x {
            Some(l) => l[i],
            None => self.x[i].ln(),
        }
    }

    pub fn logs(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.ln(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs_survive_underflow() {
        let it = Iterate::from_logs(vec![-800.0, 0.0]);
        assert_eq!(it.x[0], 0.0);
        assert_eq!(it.ln(0), -800.0);
        assert_eq!(Iterate::new(vec![1.0]).ln(0), 0.0);
    }
}
