//! Named one-line and simplex setups used by the reproductions and suites.

use super::config::{
    Config, DomainSection, FieldSection, MethodSection, OutputSection, ProblemSection, RegularizerSection,
};

pub const STEP: f64 = 0.1;
pub const START: f64 = 0.5;

fn domain(kind: &str) -> DomainSection {
    DomainSection {
        kind: kind.into(),
        dim: None,
        lo: None,
        hi: None,
        upper: None,
        a: None,
        a_csv: None,
        b: None,
        slater: None,
    }
}

fn half_line() -> DomainSection {
    DomainSection { dim: Some(1), ..domain("orthant") }
}

fn unit_box() -> DomainSection {
    DomainSection { upper: Some(vec![1.0]), ..domain("box") }
}

fn symmetric_interval() -> DomainSection {
    DomainSection { lo: Some(-1.0), hi: Some(1.0), ..domain("interval") }
}

fn field(kind: &str) -> FieldSection {
    FieldSection { kind: kind.into(), matrix: None, offset: None, u: None }
}

fn offset_field(q: f64) -> FieldSection {
    FieldSection { matrix: Some(vec![vec![1.0]]), offset: Some(vec![q]), ..field("affine") }
}

/// Mirror descent with step 0.1 from the given start.
pub fn setup(
    kernel: &str,
    dom: DomainSection,
    f: FieldSection,
    solution: Vec<f64>,
    init: Vec<f64>,
    horizon: usize,
) -> Config {
    Config {
        problem: ProblemSection {
            domain: dom,
            field: f,
            solution: Some(solution),
            lipschitz: None,
            strong: None,
            radius: None,
        },
        regularizer: RegularizerSection { kernel: kernel.into() },
        method: MethodSection {
            preset: Some("md".into()),
            alpha_a: None,
            alpha_b: None,
            gamma: Some(toml::Value::Float(STEP)),
            horizon: Some(horizon),
            init: Some(init),
            early_stop: None,
        },
        output: OutputSection::default(),
        base_dir: None,
    }
}

/// `F(x) = x` on a half-line, box or interval; the solution sits at 0.
pub fn euclidean_identity(horizon: usize) -> Config {
    setup("euclidean", half_line(), field("identity"), vec![0.0], vec![START], horizon)
}

pub fn entropy_identity(horizon: usize) -> Config {
    setup("entropy", half_line(), field("identity"), vec![0.0], vec![START], horizon)
}

pub fn tsallis_identity(horizon: usize) -> Config {
    setup("tsallis:q=0.5", unit_box(), field("identity"), vec![0.0], vec![START], horizon)
}

pub fn hellinger_identity(horizon: usize) -> Config {
    setup("hellinger", symmetric_interval(), field("identity"), vec![0.0], vec![START], horizon)
}

/// `F(x) = x + 1` on `[−1, 1]`: the solution −1 is a boundary point where the field vanishes.
pub fn hellinger_shifted(horizon: usize) -> Config {
    setup("hellinger", symmetric_interval(), offset_field(1.0), vec![-1.0], vec![START], horizon)
}

/// `F(x) = x + 1` on a half-line or box: sharp at 0 with slack 1.
pub fn euclidean_sharp(horizon: usize) -> Config {
    setup("euclidean", half_line(), field("unit_offset"), vec![0.0], vec![START], horizon)
}

pub fn entropy_sharp(horizon: usize) -> Config {
    setup("entropy", half_line(), field("unit_offset"), vec![0.0], vec![START], horizon)
}

pub fn tsallis_sharp(horizon: usize) -> Config {
    setup("tsallis:q=0.5", unit_box(), field("unit_offset"), vec![0.0], vec![START], horizon)
}

/// `F(x) = x + 2` on `[−1, 1]`: sharp at −1 with slack 1.
pub fn hellinger_sharp(horizon: usize) -> Config {
    setup("hellinger", symmetric_interval(), offset_field(2.0), vec![-1.0], vec![START], horizon)
}

/// Entropy on the simplex with `F(x) = x − u`, `u = (−0.4, 0, 1)`: the vertex
/// `(0, 0, 1)` is sharp along the first coordinate and flat along the second.
pub fn simplex_split(horizon: usize) -> Config {
    let dom = DomainSection { dim: Some(3), ..domain("simplex") };
    let f = FieldSection { u: Some(vec![-0.4, 0.0, 1.0]), ..field("shifted_identity") };
    setup("entropy", dom, f, vec![0.0, 0.0, 1.0], vec![1.0 / 3.0; 3], horizon)
}

/// The four boundary examples without sharpness, in kernel order.
pub fn general_examples(horizon: usize) -> Vec<(&'static str, Config)> {
    vec![
        ("euclidean", euclidean_identity(horizon)),
        ("entropy", entropy_identity(horizon)),
        ("tsallis", tsallis_identity(horizon)),
        ("hellinger", hellinger_shifted(horizon)),
    ]
}

/// The four sharp boundary examples, in kernel order.
pub fn sharp_examples(horizon: usize) -> Vec<(&'static str, Config)> {
    vec![
        ("euclidean", euclidean_sharp(horizon)),
        ("entropy", entropy_sharp(horizon)),
        ("tsallis", tsallis_sharp(horizon)),
        ("hellinger", hellinger_sharp(horizon)),
    ]
}

pub fn by_name(name: &str, horizon: usize) -> Option<Config> {
    Some(match name {
        "euclidean_identity" => euclidean_identity(horizon),
        "entropy_identity" => entropy_identity(horizon),
        "tsallis_identity" => tsallis_identity(horizon),
        "hellinger_identity" => hellinger_identity(horizon),
        "hellinger_shifted" => hellinger_shifted(horizon),
        "euclidean_sharp" => euclidean_sharp(horizon),
        "entropy_sharp" => entropy_sharp(horizon),
        "tsallis_sharp" => tsallis_sharp(horizon),
        "hellinger_sharp" => hellinger_sharp(horizon),
        "simplex_split" => simplex_split(horizon),
        _ => return None,
    })
}

pub const NAMES: [&str; 10] = [
    "euclidean_identity",
    "entropy_identity",
    "tsallis_identity",
    "hellinger_identity",
    "hellinger_shifted",
    "euclidean_sharp",
    "entropy_sharp",
    "tsallis_sharp",
    "hellinger_sharp",
    "simplex_split",
];
