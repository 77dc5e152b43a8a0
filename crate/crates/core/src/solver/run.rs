use std::io::Write;

use super::{dist, MethodConfig, Problem};
use crate::error::{check_dim, Error, Result};
use crate::iterate::Iterate;
use crate::kernels::Regularizer;
use crate::prox::{prox_iterate, tracks_logs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Horizon,
    /// `D(x*, X_t)` dropped below the early-stop threshold at step `t`.
    ConvergedToPrecision(usize),
    /// A log-coordinate stopped being finite at step `t`.
    LogUnderflow(usize),
}

impl StopReason {
    pub fn label(&self) -> String {
        match self {
            StopReason::Horizon => "horizon".into(),
            StopReason::ConvergedToPrecision(t) => format!("converged-to-precision at t={t}"),
            StopReason::LogUnderflow(t) => format!("log-underflow at t={t}"),
        }
    }
}

/// Recorded run of the recursion; `base[k]` is `X_{k+1}` and `leading[k]` is `X_{k+3/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub base: Vec<Vec<f64>>,
    pub leading: Vec<Vec<f64>>,
    /// `ln X_t` per coordinate, kept by entropic runs.
    pub log_base: Option<Vec<Vec<f64>>>,
    /// `D(x*, X_t)`; empty without a known solution.
    pub divergence: Vec<f64>,
    /// `‖X_t − x*‖`; empty without a known solution.
    pub distance: Vec<f64>,
    /// `E_t = D(x*, X_t) + P_t`; empty without a known solution.
    pub energy: Vec<f64>,
    /// `P_t`, with `P_1 = 0`.
    pub penalty: Vec<f64>,
    /// `γ_t` used at step `t`.
    pub steps: Vec<f64>,
    pub stop: StopReason,
    /// First step whose leading state left the declared neighborhood.
    pub neighborhood_exit: Option<usize>,
    pub field_calls: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.base.first().map_or(0, Vec::len)
    }

    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.base.iter().map(|x| x[i]).collect()
    }

    /// `ln X_{t,i}`; exact for entropic runs even after underflow.
    pub fn log_coordinate(&self, i: usize) -> Vec<f64> {
        match &self.log_base {
            Some(l) => l.iter().map(|x| x[i]).collect(),
            None => self.base.iter().map(|x| x[i].ln()).collect(),
        }
    }

    /// CSV with header `t,x_1..x_n,lead_1..lead_n,div,dist,energy`; the last
    /// row has empty leading columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=n).map(|i| format!("lead_{i}")));
        header.extend(["div", "dist", "energy"].map(String::from));
        w.write_record(&header).map_err(io_err)?;
        for (k, x) in self.base.iter().enumerate() {
            let mut row = vec![(k + 1).to_string()];
            row.extend(x.iter().map(|v| fmt_f64(*v)));
            match self.leading.get(k) {
                Some(l) => row.extend(l.iter().map(|v| fmt_f64(*v))),
                None => row.extend(std::iter::repeat_n(String::new(), n)),
            }
            for series in [&self.divergence, &self.distance, &self.energy] {
                row.push(series.get(k).map(|v| fmt_f64(*v)).unwrap_or_default());
            }
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

// F(X_{t−1/2}) carried between steps.
struct Stepper<'a> {
    h: &'a Regularizer,
    prob: &'a Problem,
    alpha_a: f64,
    alpha_b: f64,
    calls: usize,
}

struct StepOut {
    lead: Iterate,
    next: Iterate,
    f_lead: Vec<f64>,
    signal: Vec<f64>,
}

impl Stepper<'_> {
    fn eval(&mut self, x: &[f64]) -> Vec<f64> {
        self.calls += 1;
        self.prob.eval(x)
    }

    fn step(&mut self, gamma: f64, base: &Iterate, f_base: Option<&[f64]>, f_prev_lead: &[f64]) -> Result<StepOut> {
        let n = base.dim();
        let f_base_owned = match f_base {
            None if self.alpha_a != 0.0 => Some(self.eval(&base.x)),
            _ => None,
        };
        let f_base = f_base.or(f_base_owned.as_deref());
        let mut signal = vec![0.0; n];
        for i in 0..n {
            let mut v = self.alpha_b * f_prev_lead[i];
            if self.alpha_a != 0.0 {
                v += self.alpha_a * f_base.expect("evaluated above")[i];
            }
            signal[i] = v;
        }
        let (lead, f_lead) = if signal.iter().all(|v| *v == 0.0) {
            let f = match f_base {
                Some(f) => f.to_vec(),
                None => self.eval(&base.x),
            };
            (base.clone(), f)
        } else {
            let y: Vec<f64> = signal.iter().map(|v| -gamma * v).collect();
            let lead = prox_iterate(self.h, base, &y)?;
            let f = self.eval(&lead.x);
            (lead, f)
        };
        let y: Vec<f64> = f_lead.iter().map(|v| -gamma * v).collect();
        let next = prox_iterate(self.h, base, &y)?;
        Ok(StepOut { lead, next, f_lead, signal })
    }
}

/// One step from `(X_t, X_{t−1/2})`, returning `(X_{t+1/2}, X_{t+1})`.
pub fn bpm_step(
    h: &Regularizer,
    prob: &Problem,
    cfg: &MethodConfig,
    t: usize,
    base: &Iterate,
    prev_leading: &[f64],
) -> Result<(Iterate, Iterate)> {
    check_dim(prob.dim(), base.dim())?;
    check_dim(prob.dim(), prev_leading.len())?;
    let mut s = Stepper { h, prob, alpha_a: cfg.alpha_a, alpha_b: cfg.alpha_b, calls: 0 };
    let f_prev = prob.eval(prev_leading);
    let out = s.step(cfg.gamma(t), base, None, &f_prev)?;
    Ok((out.lead, out.next))
}

/// Iterates the recursion from `cfg.init` with `X_{1/2} = X_1`.
pub fn run(prob: &Problem, h: &Regularizer, cfg: &MethodConfig) -> Result<Trajectory> {
    cfg.validate()?;
    check_dim(prob.dim(), h.dim())?;
    check_dim(prob.dim(), cfg.init.len())?;
    if !h.in_prox_domain(&cfg.init) {
        let i = cfg.init.iter().position(|v| !h.kernel().differentiable_at(*v)).unwrap_or(0);
        return Err(Error::ProxDomain { index: i, value: cfg.init[i] });
    }
    let logs = tracks_logs(h);
    let mut state = Iterate::new(cfg.init.clone());
    if logs {
        state = state.with_logs();
    }
    let x_star = prob.solution.as_deref();
    let cap = cfg.horizon.min(1 << 22);
    let mut traj = Trajectory {
        base: Vec::with_capacity(cap),
        leading: Vec::with_capacity(cap),
        log_base: logs.then(|| Vec::with_capacity(cap)),
        divergence: Vec::new(),
        distance: Vec::new(),
        energy: Vec::new(),
        penalty: vec![0.0],
        steps: Vec::with_capacity(cap),
        stop: StopReason::Horizon,
        neighborhood_exit: None,
        field_calls: 0,
    };
    let record = |traj: &mut Trajectory, st: &Iterate, penalty: f64| -> Result<Option<f64>> {
        traj.base.push(st.x.clone());
        if let Some(l) = traj.log_base.as_mut() {
            l.push(st.logs());
        }
        if let Some(xs) = x_star {
            let d = h.divergence_unchecked(xs, &st.x)?;
            traj.divergence.push(d);
            traj.distance.push(dist(&st.x, xs));
            traj.energy.push(d + penalty);
            return Ok(Some(d));
        }
        Ok(None)
    };
    record(&mut traj, &state, 0.0)?;

    let mut stepper = Stepper { h, prob, alpha_a: cfg.alpha_a, alpha_b: cfg.alpha_b, calls: 0 };
    // X_{1/2} = X_1
    let mut f_prev_lead = stepper.eval(&state.x);
    let ab = cfg.alpha_a + cfg.alpha_b;
    for t in 1..cfg.horizon {
        let gamma = cfg.gamma(t);
        let f_base = (t == 1).then_some(f_prev_lead.as_slice());
        let out = stepper.step(gamma, &state, f_base, &f_prev_lead)?;
        let pen: f64 =
            out.f_lead.iter().zip(&out.signal).map(|(fl, v)| (ab * fl - v).powi(2)).sum::<f64>() * gamma * gamma;
        if let (Some(xs), None) = (x_star, traj.neighborhood_exit) {
            if dist(&out.lead.x, xs) > prob.radius {
                traj.neighborhood_exit = Some(t);
            }
        }
        traj.steps.push(gamma);
        traj.leading.push(out.lead.x);
        traj.penalty.push(pen);
        state = out.next;
        f_prev_lead = out.f_lead;
        let d = record(&mut traj, &state, pen)?;
        if state.log_x.as_ref().is_some_and(|l| l.iter().any(|v| !v.is_finite())) {
            traj.stop = StopReason::LogUnderflow(t + 1);
            break;
        }
        if let (Some(d), Some(thr)) = (d, cfg.early_stop) {
            if d > 0.0 && d < thr {
                traj.stop = StopReason::ConvergedToPrecision(t + 1);
                break;
            }
        }
    }
    traj.field_calls = stepper.calls;
    Ok(traj)
}
