use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Growth class of `θ'` near the lower end of the scalar domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryClass {
    /// `θ'` bounded below near the boundary.
    EuclideanLike,
    /// `θ'(x) + log x` bounded below.
    EntropyLike,
    /// `x^ν θ'(x)` bounded below, `ν ∈ (0, 1)`.
    PowerLike(f64),
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryClass::EuclideanLike => write!(f, "euclidean_like"),
            BoundaryClass::EntropyLike => write!(f, "entropy_like"),
            BoundaryClass::PowerLike(nu) => write!(f, "power_like({nu})"),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user supplied kernel. Only the empirical analysis tools apply to it.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub value: ScalarFn,
    pub grad: ScalarFn,
    pub hess: ScalarFn,
    pub scalar_domain: (f64, f64),
    pub steep: bool,
    pub boundary_class: Option<BoundaryClass>,
}

/// Scalar convex kernel `θ` of a decomposable regularizer `h(x) = Σ θ(x_i)`.
#[derive(Clone)]
pub enum BregmanKernel {
    /// `θ(x) = x²/2` on the real line.
    Euclidean,
    /// `θ(x) = x log x` on `[0, ∞)`.
    Entropy,
    /// `θ(x) = (x − x^q) / (q(1 − q))` on the bounded box `[0, upper]`.
    Tsallis {
        q: f64,
        upper: f64,
    },
    /// `θ(x) = −sqrt(1 − x²)` on `[−1, 1]`.
    Hellinger,
    Custom(Arc<CustomKernel>),
}

impl fmt::Debug for BregmanKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BregmanKernel({})", self.name())
    }
}

impl PartialEq for BregmanKernel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Euclidean, Self::Euclidean)
            | (Self::Entropy, Self::Entropy)
            | (Self::Hellinger, Self::Hellinger) => true,
            (Self::Tsallis { q: a, upper: m }, Self::Tsallis { q: b, upper: n }) => a == b && m == n,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

// Series cutoff for the near-diagonal divergence expansions.
const SERIES_EPS: f64 = 1e-2;
const SERIES_TERMS: i32 = 12;

impl BregmanKernel {
    /// Tsallis kernel on `[0, 1]`, where it is 1-strongly convex for `q < 1`.
    pub fn tsallis(q: f64) -> Result<Self> {
        Self::tsallis_bounded(q, 1.0)
    }

    pub fn tsallis_bounded(q: f64, upper: f64) -> Result<Self> {
        if !(q > 0.0) || q == 1.0 || !q.is_finite() {
            return Err(Error::InvalidArgument(format!("tsallis exponent q={q} must be positive and != 1")));
        }
        if !(upper > 0.0) || !upper.is_finite() {
            return Err(Error::InvalidArgument(format!("tsallis box bound {upper} must be finite and positive")));
        }
        Ok(Self::Tsallis { q, upper })
    }

    /// Parses `euclidean`, `entropy`, `hellinger`, `tsallis:q=<float>` and
    /// `tsallis:q=<float>,upper=<float>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "euclidean" => return Ok(Self::Euclidean),
            "entropy" => return Ok(Self::Entropy),
            "hellinger" => return Ok(Self::Hellinger),
            _ => {}
        }
        let Some(params) = text.strip_prefix("tsallis:") else {
            return Err(Error::InvalidArgument(format!("unknown kernel `{text}`")));
        };
        let mut q = None;
        let mut upper = 1.0;
        for part in params.split(',') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("malformed kernel parameter `{part}`")))?;
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("kernel parameter `{part}` is not a number")))?;
            match key.trim() {
                "q" => q = Some(val),
                "upper" | "m" => upper = val,
                other => return Err(Error::InvalidArgument(format!("unknown kernel parameter `{other}`"))),
            }
        }
        let q = q.ok_or_else(|| Error::InvalidArgument("tsallis kernel needs q=<float>".into()))?;
        Self::tsallis_bounded(q, upper)
    }

    pub fn name(&self) -> String {
        match self {
            Self::Euclidean => "euclidean".into(),
            Self::Entropy => "entropy".into(),
            Self::Tsallis { q, upper } if *upper == 1.0 => format!("tsallis:q={q}"),
            Self::Tsallis { q, upper } => format!("tsallis:q={q},upper={upper}"),
            Self::Hellinger => "hellinger".into(),
            Self::Custom(c) => c.name.clone(),
        }
    }

    pub fn scalar_domain(&self) -> (f64, f64) {
        match self {
            Self::Euclidean => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Entropy => (0.0, f64::INFINITY),
            Self::Tsallis { upper, .. } => (0.0, *upper),
            Self::Hellinger => (-1.0, 1.0),
            Self::Custom(c) => c.scalar_domain,
        }
    }

    /// True when `θ'` diverges to `−∞` at the lower end of the scalar domain.
    pub fn steep(&self) -> bool {
        match self {
            Self::Euclidean => false,
            Self::Entropy | Self::Hellinger => true,
            Self::Tsallis { q, .. } => *q < 1.0,
            Self::Custom(c) => c.steep,
        }
    }

    /// True when `θ'` also diverges at the upper end (Hellinger only).
    pub(crate) fn steep_above(&self) -> bool {
        matches!(self, Self::Hellinger)
    }

    pub fn boundary_class(&self) -> Option<BoundaryClass> {
        match self {
            Self::Euclidean => Some(BoundaryClass::EuclideanLike),
            Self::Entropy => Some(BoundaryClass::EntropyLike),
            Self::Tsallis { q, .. } if *q < 1.0 => Some(BoundaryClass::PowerLike(1.0 - q)),
            Self::Tsallis { .. } => Some(BoundaryClass::EuclideanLike),
            // θ'(x) ~ −1/sqrt(2(x + 1)) at the lower end
            Self::Hellinger => Some(BoundaryClass::PowerLike(0.5)),
            Self::Custom(c) => c.boundary_class,
        }
    }

    /// Legendre exponent of the kernel at the lower end of its scalar domain.
    pub(crate) fn boundary_exponent(&self) -> Option<f64> {
        match self {
            Self::Euclidean => Some(0.0),
            Self::Entropy => Some(0.5),
            Self::Tsallis { q, .. } => Some((1.0 - q / 2.0).max(0.0)),
            Self::Hellinger => Some(0.75),
            Self::Custom(_) => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.scalar_domain();
        x >= lo && x <= hi
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            let (lo, hi) = self.scalar_domain();
            Err(Error::Domain { value: x, domain: format!("[{lo}, {hi}] of {}", self.name()) })
        }
    }

    /// True when `θ'` is finite at `x`.
    pub fn differentiable_at(&self, x: f64) -> bool {
        let (lo, hi) = self.scalar_domain();
        if !self.contains(x) {
            return false;
        }
        !((x == lo && self.steep()) || (x == hi && self.steep_above()))
    }

    /// `θ(x)`, `θ'(x)` or `θ''(x)` with domain checks.
    pub fn eval(&self, x: f64, order: u8) -> Result<f64> {
        self.check_domain(x)?;
        match order {
            0 => Ok(self.value(x)),
            1 | 2 => {
                if !self.differentiable_at(x) {
                    return Err(Error::BoundaryDerivative(x));
                }
                Ok(if order == 1 { self.grad(x) } else { self.hess(x) })
            }
            _ => Err(Error::InvalidArgument(format!("derivative order {order} not in 0..=2"))),
        }
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        match self {
            Self::Euclidean => 0.5 * x * x,
            Self::Entropy => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            Self::Tsallis { q, .. } => (x - x.powf(*q)) / (q * (1.0 - q)),
            Self::Hellinger => -(1.0 - x * x).max(0.0).sqrt(),
            Self::Custom(c) => (c.value)(x),
        }
    }

    pub(crate) fn grad(&self, x: f64) -> f64 {
        match self {
            Self::Euclidean => x,
            Self::Entropy => 1.0 + x.ln(),
            Self::Tsallis { q, .. } => {
                if x == 0.0 && *q > 1.0 {
                    1.0 / (q * (1.0 - q))
                } else {
                    (1.0 - q * x.powf(q - 1.0)) / (q * (1.0 - q))
                }
            }
            Self::Hellinger => x / (1.0 - x * x).sqrt(),
            Self::Custom(c) => (c.grad)(x),
        }
    }

    pub(crate) fn hess(&self, x: f64) -> f64 {
        match self {
            Self::Euclidean => 1.0,
            Self::Entropy => 1.0 / x,
            Self::Tsallis { q, .. } => x.powf(q - 2.0),
            Self::Hellinger => (1.0 - x * x).powf(-1.5),
            Self::Custom(c) => (c.hess)(x),
        }
    }

    /// Inverse mirror map `(θ')⁻¹(u)`, clamped to the scalar domain for
    /// non-steep ends.
    pub fn mirror_inverse(&self, u: f64) -> Result<f64> {
        let (lo, hi) = self.scalar_domain();
        let z = match self {
            Self::Euclidean => u,
            Self::Entropy => (u - 1.0).exp(),
            Self::Tsallis { q, .. } => {
                let base = (1.0 - q * (1.0 - q) * u) / q;
                if *q < 1.0 {
                    if !(base > 0.0) {
                        return Err(Error::ProxUndefined(format!(
                            "tsallis mirror value {u} exceeds 1/(q(1-q)) = {}",
                            1.0 / (q * (1.0 - q))
                        )));
                    }
                    base.powf(1.0 / (q - 1.0))
                } else if base <= 0.0 {
                    0.0
                } else {
                    base.powf(1.0 / (q - 1.0))
                }
            }
            Self::Hellinger => u / (1.0 + u * u).sqrt(),
            Self::Custom(_) => self.mirror_inverse_numeric(u)?,
        };
        Ok(z.clamp(lo, hi))
    }

    // Safeguarded bisection + Newton on θ'(z) = u.
    fn mirror_inverse_numeric(&self, u: f64) -> Result<f64> {
        let (lo, hi) = self.scalar_domain();
        let mut a = if lo.is_finite() { lo } else { -1.0 };
        let mut b = if hi.is_finite() { hi } else { 1.0 };
        // widen infinite ends until the root is bracketed
        let mut widen = 0;
        while !lo.is_finite() && self.grad(a) > u && widen < 2000 {
            a = 2.0 * a - 1.0;
            widen += 1;
        }
        while !hi.is_finite() && self.grad(b) < u && widen < 4000 {
            b = 2.0 * b + 1.0;
            widen += 1;
        }
        if lo.is_finite() && !self.steep() && self.grad(lo) >= u {
            return Ok(lo);
        }
        if hi.is_finite() && self.grad(hi).is_finite() && self.grad(hi) <= u {
            return Ok(hi);
        }
        let mut z = 0.5 * (a + b);
        for _ in 0..200 {
            let g = self.grad(z) - u;
            if g.abs() <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
            if g > 0.0 {
                b = z;
            } else {
                a = z;
            }
            let newton = z - g / self.hess(z);
            z = if newton > a && newton < b && newton.is_finite() { newton } else { 0.5 * (a + b) };
            if (b - a).abs() <= 1e-16 * (1.0 + z.abs()) {
                break;
            }
        }
        Ok(z)
    }

    /// Scalar Bregman divergence `θ(p) − θ(x) − θ'(x)(p − x)`, evaluated with
    /// cancellation-free forms near the diagonal.
    pub fn divergence(&self, p: f64, x: f64) -> Result<f64> {
        self.check_domain(p)?;
        self.check_domain(x)?;
        if p == x {
            return Ok(0.0);
        }
        if !self.differentiable_at(x) {
            return Err(Error::ProxDomain { index: 0, value: x });
        }
        let d = match self {
            Self::Euclidean => 0.5 * (p - x) * (p - x),
            Self::Entropy => {
                if p == 0.0 {
                    x
                } else {
                    let eps = (p - x) / x;
                    if eps.abs() < SERIES_EPS {
                        // (1+ε)ln(1+ε) − ε = Σ_{k≥2} (−1)^k ε^k / (k(k−1))
                        let mut sum = 0.0;
                        let mut pow = eps * eps;
                        for k in 2..=SERIES_TERMS {
                            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                            sum += sign * pow / f64::from(k * (k - 1));
                            pow *= eps;
                        }
                        x * sum
                    } else {
                        p * (p / x).ln() + x - p
                    }
                }
            }
            Self::Tsallis { q, .. } => {
                let q = *q;
                if p == 0.0 {
                    x.powf(q) / q
                } else if x == 0.0 {
                    // non-steep case: θ(0) = 0
                    (p - p.powf(q)) / (q * (1.0 - q)) - self.grad(0.0) * p
                } else {
                    let eps = (p - x) / x;
                    if eps.abs() < SERIES_EPS {
                        // 1 + qε − (1+ε)^q = −Σ_{k≥2} C(q,k) ε^k
                        let mut coef = q;
                        let mut pow = eps;
                        let mut sum = 0.0;
                        for k in 2..=SERIES_TERMS {
                            coef *= (q - f64::from(k) + 1.0) / f64::from(k);
                            pow *= eps;
                            sum -= coef * pow;
                        }
                        x.powf(q) / (q * (1.0 - q)) * sum
                    } else {
                        (x.powf(q) - p.powf(q)) / (q * (1.0 - q)) - x.powf(q - 1.0) * (x - p) / (1.0 - q)
                    }
                }
            }
            Self::Hellinger => {
                // 1 − px − sqrt((1−p²)(1−x²)) = (p−x)² / (1 − px + sqrt((1−p²)(1−x²)))
                let root = ((1.0 - p * p) * (1.0 - x * x)).max(0.0).sqrt();
                let num = (p - x) * (p - x) / (1.0 - p * x + root);
                num / (1.0 - x * x).sqrt()
            }
            Self::Custom(c) => (c.value)(p) - (c.value)(x) - (c.grad)(x) * (p - x),
        };
        Ok(d.max(0.0))
    }
}

/// Evaluates `θ`, `θ'` or `θ''` of a kernel.
pub fn kernel_eval(kernel: &BregmanKernel, x: f64, order: u8) -> Result<f64> {
    kernel.eval(x, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<BregmanKernel> {
        vec![
            BregmanKernel::Euclidean,
            BregmanKernel::Entropy,
            BregmanKernel::tsallis(0.5).unwrap(),
            BregmanKernel::Hellinger,
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(kernel_eval(&BregmanKernel::Entropy, 1.0, 1).unwrap(), 1.0);
        assert_eq!(kernel_eval(&BregmanKernel::tsallis(0.5).unwrap(), 0.0, 0).unwrap(), 0.0);
        assert_eq!(kernel_eval(&BregmanKernel::Hellinger, 0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(kernel_eval(&BregmanKernel::Entropy, -0.1, 0), Err(Error::Domain { .. })));
        assert!(matches!(kernel_eval(&BregmanKernel::Entropy, 0.0, 1), Err(Error::BoundaryDerivative(_))));
        assert!(matches!(kernel_eval(&BregmanKernel::Hellinger, 1.0, 2), Err(Error::BoundaryDerivative(_))));
        // non-steep kernels have a finite one-sided derivative at 0
        assert_eq!(kernel_eval(&BregmanKernel::Euclidean, 0.0, 1).unwrap(), 0.0);
        let t = BregmanKernel::tsallis_bounded(1.5, 2.0).unwrap();
        assert!(kernel_eval(&t, 0.0, 1).unwrap().is_finite());
    }

    #[test]
    fn steepness_matches_boundary_class() {
        for k in builtins() {
            let class = k.boundary_class().unwrap();
            assert_eq!(k.steep(), class != BoundaryClass::EuclideanLike, "{}", k.name());
        }
    }

    #[test]
    fn hessian_positive_on_interior() {
        for k in builtins() {
            let (lo, hi) = k.scalar_domain();
            let lo = if lo.is_finite() { lo } else { -5.0 };
            let hi = if hi.is_finite() { hi } else { 5.0 };
            for i in 1..100 {
                let x = lo + (hi - lo) * f64::from(i) / 100.0;
                assert!(k.hess(x) > 0.0, "{} at {x}", k.name());
            }
        }
    }

    #[test]
    fn boundary_class_certification_on_grid() {
        // entropy: θ'(x) + log x = 1 exactly
        for k in 1..=40 {
            let x = 0.5f64.powi(k);
            let e = BregmanKernel::Entropy.grad(x) - 1.0 - x.ln();
            assert!(e.abs() < 1e-12);
        }
        // tsallis: x^{1-q} θ'(x) stays bounded
        let t = BregmanKernel::tsallis(0.5).unwrap();
        let vals: Vec<f64> = (1..=40)
            .map(|k| {
                let x = 0.5f64.powi(k);
                x.powf(0.5) * t.grad(x)
            })
            .collect();
        assert!(vals.iter().all(|v| v.is_finite() && *v > -10.0 && *v < 10.0));
        // euclidean: θ' bounded below
        assert!((1..=40).all(|k| BregmanKernel::Euclidean.grad(0.5f64.powi(k)) >= 0.0));
    }

    #[test]
    fn mirror_inverse_roundtrip() {
        for k in builtins() {
            for &x in &[0.01, 0.2, 0.5, 0.9] {
                let u = k.grad(x);
                let z = k.mirror_inverse(u).unwrap();
                assert!((z - x).abs() < 1e-12, "{} at {x}: {z}", k.name());
            }
        }
        let t = BregmanKernel::tsallis(0.5).unwrap();
        assert!(matches!(t.mirror_inverse(10.0), Err(Error::ProxUndefined(_))));
    }

    #[test]
    fn custom_kernel_mirror_inverse() {
        let custom = BregmanKernel::Custom(Arc::new(CustomKernel {
            name: "cosh".into(),
            value: Arc::new(|x: f64| x.cosh()),
            grad: Arc::new(|x: f64| x.sinh()),
            hess: Arc::new(|x: f64| x.cosh()),
            scalar_domain: (f64::NEG_INFINITY, f64::INFINITY),
            steep: false,
            boundary_class: None,
        }));
        let z = custom.mirror_inverse(3.0).unwrap();
        assert!((z.sinh() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_series_matches_direct_form() {
        let pairs = [(0.3, 0.301), (0.7, 0.6995), (0.5, 0.52), (0.05, 0.0498)];
        for k in [BregmanKernel::Entropy, BregmanKernel::tsallis(0.5).unwrap(), BregmanKernel::Hellinger] {
            for &(p, x) in &pairs {
                let stable = k.divergence(p, x).unwrap();
                let direct = k.value(p) - k.value(x) - k.grad(x) * (p - x);
                assert!((stable - direct).abs() < 1e-12 * (1.0 + direct.abs()), "{} {p} {x}", k.name());
                // second-order agreement with θ''(x)(p−x)²/2
                let quad = 0.5 * k.hess(x) * (p - x) * (p - x);
                assert!((stable - quad).abs() < 0.2 * quad);
            }
        }
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(BregmanKernel::Euclidean.divergence(1.0, 3.0).unwrap(), 2.0);
        assert!((BregmanKernel::Entropy.divergence(0.0, 0.7).unwrap() - 0.7).abs() < 1e-15);
        let t = BregmanKernel::tsallis(0.5).unwrap();
        assert!((t.divergence(0.0, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(BregmanKernel::Entropy.divergence(0.5, 0.0), Err(Error::ProxDomain { .. })));
    }

    #[test]
    fn parse_names() {
        for k in builtins() {
            assert_eq!(BregmanKernel::parse(&k.name()).unwrap(), k);
        }
        assert!(BregmanKernel::parse("tsallis:q=1").is_err());
        assert!(BregmanKernel::parse("burg").is_err());
    }
}
