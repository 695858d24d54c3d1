use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use rhdg::mesh::{generate_channel_cylinder, generate_unit_square, kovasznay_mesh, read_mesh, Mesh};
use rhdg::solvers::{Scheme, SemiDiscretization, StokesVariant};
use rhdg::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Kovasznay,
    Lattice,
    Cylinder,
    Infsup,
    ReconstructCheck,
    Manufactured,
}

impl Scenario {
    pub fn is_unsteady(self) -> bool {
        matches!(self, Scenario::Lattice | Scenario::Cylinder)
    }
}

/// Inclusive range of polynomial orders, written `a..b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orders {
    pub first: usize,
    pub last: usize,
}

impl Orders {
    pub fn all(self) -> Vec<usize> {
        (self.first..=self.last).collect()
    }

    pub fn single(self) -> Result<usize> {
        if self.first == self.last {
            Ok(self.first)
        } else {
            Err(Error::Config(format!("this scenario takes a single order, got {self}")))
        }
    }
}

impl FromStr for Orders {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("invalid order `{t}` in `{s}`")))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
            None => {
                let k = num(s)?;
                (k, k)
            }
        };
        if first == 0 || last < first {
            return Err(Error::Config(format!("order range `{s}` must satisfy 1 <= a <= b")));
        }
        Ok(Orders { first, last })
    }
}

impl fmt::Display for Orders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "{}", self.first)
        } else {
            write!(f, "{}..{}", self.first, self.last)
        }
    }
}

/// Mesh source: `square:N`, `square-periodic:N`, `channel:H`, `kovasznay:N` or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MeshSpec {
    Square(usize),
    SquarePeriodic(usize),
    Channel(f64),
    /// Structured mesh of the Kovasznay domain with about this many elements.
    Kovasznay(usize),
    File(PathBuf),
}

impl MeshSpec {
    pub fn build(&self) -> Result<Arc<Mesh>> {
        let mesh = match self {
            MeshSpec::Square(n) => generate_unit_square(*n, false),
            MeshSpec::SquarePeriodic(n) => generate_unit_square(*n, true),
            MeshSpec::Channel(h) => generate_channel_cylinder(*h)?,
            MeshSpec::Kovasznay(n) => kovasznay_mesh(*n),
            MeshSpec::File(p) => read_mesh(p).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("cannot read mesh {}: {io}", p.display())),
                other => other,
            })?,
        };
        Ok(Arc::new(mesh))
    }
}

impl FromStr for MeshSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid mesh `{s}` (expected square:N, square-periodic:N, channel:H, kovasznay:N or file:PATH)"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let count = || match arg.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(bad()),
        };
        match kind {
            "square" => Ok(MeshSpec::Square(count()?)),
            "square-periodic" => Ok(MeshSpec::SquarePeriodic(count()?)),
            "kovasznay" => Ok(MeshSpec::Kovasznay(count()?)),
            "channel" => match arg.parse::<f64>() {
                Ok(h) if h > 0.0 && h.is_finite() => Ok(MeshSpec::Channel(h)),
                _ => Err(bad()),
            },
            "file" if !arg.is_empty() => Ok(MeshSpec::File(arg.into())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Square(n) => write!(f, "square:{n}"),
            MeshSpec::SquarePeriodic(n) => write!(f, "square-periodic:{n}"),
            MeshSpec::Channel(h) => write!(f, "channel:{h}"),
            MeshSpec::Kovasznay(n) => write!(f, "kovasznay:{n}"),
            MeshSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for MeshSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeshSpec> for String {
    fn from(m: MeshSpec) -> String {
        m.to_string()
    }
}

/// Fully resolved run configuration; stored in the manifest so a run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub k: Orders,
    pub mesh: MeshSpec,
    /// Mesh sizes of the refinement study (`manufactured` only).
    pub refinements: Vec<usize>,
    pub nu: f64,
    pub lambda: f64,
    pub variants: Vec<StokesVariant>,
    pub semidisc: SemiDiscretization,
    pub scheme: Scheme,
    pub post_reconstruct: bool,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub seed: u64,
    pub samples: usize,
    pub full_benchmark: bool,
    pub out: PathBuf,
    pub dump_system: Option<PathBuf>,
}

/// Optional overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub k: Option<Orders>,
    pub mesh: Option<MeshSpec>,
    pub nt: Option<usize>,
    pub n: Option<Vec<usize>>,
    pub nu: Option<f64>,
    pub lambda: Option<f64>,
    pub variants: Option<Vec<StokesVariant>>,
    pub semidisc: Option<SemiDiscretization>,
    pub scheme: Option<Scheme>,
    pub post_reconstruct: Option<bool>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub stride: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub full_benchmark: bool,
    pub out: Option<PathBuf>,
    pub dump_system: Option<PathBuf>,
}

/// Final time of the full cylinder benchmark.
pub const FULL_BENCHMARK_T_END: f64 = 8.0;

impl ScenarioConfig {
    /// Scenario defaults with the given overrides applied, then validated.
    pub fn resolve(scenario: Scenario, o: Overrides) -> Result<Self> {
        use Scenario::*;
        let k = o.k.unwrap_or(match scenario {
            Kovasznay => Orders { first: 2, last: 8 },
            Lattice => Orders { first: 4, last: 4 },
            Cylinder => Orders { first: 3, last: 3 },
            Infsup => Orders { first: 1, last: 6 },
            ReconstructCheck => Orders { first: 1, last: 8 },
            Manufactured => Orders { first: 2, last: 3 },
        });
        let n = o.n.clone().unwrap_or_default();
        let mesh = match (o.mesh, scenario) {
            (Some(m), _) => m,
            (None, Kovasznay) => MeshSpec::Kovasznay(o.nt.unwrap_or(20)),
            (None, Lattice) => MeshSpec::SquarePeriodic(n.first().copied().unwrap_or(10)),
            (None, Cylinder) => MeshSpec::Channel(rhdg::scenarios::CHANNEL_H_TARGET),
            (None, Manufactured) => MeshSpec::Square(n.first().copied().unwrap_or(4)),
            (None, Infsup | ReconstructCheck) => MeshSpec::Square(n.first().copied().unwrap_or(4)),
        };
        let refinements = if scenario == Manufactured {
            o.n.unwrap_or_else(|| vec![4, 8, 16, 32])
        } else {
            Vec::new()
        };
        let nu = o.nu.unwrap_or(match scenario {
            Kovasznay => 1.0 / 40.0,
            Lattice => 1e-6,
            Cylinder => 1e-3,
            _ => 1.0,
        });
        let semidisc = o.semidisc.unwrap_or(SemiDiscretization::D);
        let t_end = match (o.t_end, scenario) {
            (Some(t), _) => t,
            (None, Cylinder) if o.full_benchmark => FULL_BENCHMARK_T_END,
            (None, Cylinder) => 0.5,
            (None, _) => 0.1,
        };
        let config = ScenarioConfig {
            scenario,
            k,
            mesh,
            refinements,
            nu,
            lambda: o.lambda.unwrap_or(rhdg::assembly::DEFAULT_LAMBDA),
            variants: o.variants.unwrap_or_else(|| match scenario {
                Kovasznay | Manufactured => vec![StokesVariant::B, StokesVariant::PR],
                _ => vec![StokesVariant::PR],
            }),
            semidisc,
            scheme: o.scheme.unwrap_or(if scenario == Cylinder { Scheme::Sbdf2 } else { Scheme::Imex1 }),
            post_reconstruct: o.post_reconstruct.unwrap_or(semidisc == SemiDiscretization::D),
            dt: o.dt.unwrap_or(if scenario == Cylinder { 5e-4 } else { 1e-4 }),
            t_end,
            stride: o.stride.unwrap_or(10),
            seed: o.seed.unwrap_or(2024),
            samples: o.samples.unwrap_or(200),
            full_benchmark: o.full_benchmark,
            out: o.out.unwrap_or_else(|| PathBuf::from("out")),
            dump_system: o.dump_system,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.k.first == 0 || self.k.last < self.k.first {
            return fail(format!("invalid order range {}", self.k));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return fail(format!("viscosity must be positive, got {}", self.nu));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("penalty must be positive, got {}", self.lambda));
        }
        if self.variants.is_empty() {
            return fail("at least one variant is required".into());
        }
        if self.scenario.is_unsteady() {
            if !(self.dt > 0.0 && self.t_end > 0.0 && self.dt.is_finite() && self.t_end.is_finite()) {
                return fail(format!("dt and tend must be positive, got {} and {}", self.dt, self.t_end));
            }
            self.k.single()?;
        }
        match (self.scenario, &self.mesh) {
            (Scenario::Lattice, MeshSpec::SquarePeriodic(_)) => {}
            (Scenario::Lattice, m) => return fail(format!("lattice flow needs a square-periodic mesh, got {m}")),
            (Scenario::Cylinder, MeshSpec::Channel(_) | MeshSpec::File(_)) => {}
            (Scenario::Cylinder, m) => return fail(format!("cylinder flow needs a channel or file mesh, got {m}")),
            _ => {}
        }
        if self.scenario == Scenario::Manufactured && (self.refinements.is_empty() || self.refinements.contains(&0)) {
            return fail("manufactured study needs positive mesh sizes".into());
        }
        if self.scenario == Scenario::ReconstructCheck && self.samples == 0 {
            return fail("samples must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_ranges_parse() {
        assert_eq!("2..8".parse::<Orders>().unwrap().all(), (2..=8).collect::<Vec<_>>());
        assert_eq!("1..=3".parse::<Orders>().unwrap().all(), vec![1, 2, 3]);
        assert_eq!("4".parse::<Orders>().unwrap().single().unwrap(), 4);
        assert!("0..2".parse::<Orders>().is_err());
        assert!("5..2".parse::<Orders>().is_err());
        assert!("x".parse::<Orders>().is_err());
        assert!("2..4".parse::<Orders>().unwrap().single().is_err());
    }

    #[test]
    fn mesh_specs_round_trip() {
        for s in ["square:4", "square-periodic:10", "channel:0.06", "kovasznay:20", "file:/tmp/m.msh"] {
            assert_eq!(s.parse::<MeshSpec>().unwrap().to_string(), s);
        }
        for s in ["square", "square:0", "channel:-1", "disk:3", "file:"] {
            assert!(s.parse::<MeshSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ScenarioConfig::resolve(Scenario::Cylinder, Overrides::default()).unwrap();
        assert_eq!((c.scheme, c.dt, c.t_end), (Scheme::Sbdf2, 5e-4, 0.5));
        let back: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        let lattice_on_square = Overrides {
            mesh: Some(MeshSpec::Square(4)),
            ..Default::default()
        };
        assert!(matches!(ScenarioConfig::resolve(Scenario::Lattice, lattice_on_square), Err(Error::Config(_))));
        let negative_dt = Overrides {
            dt: Some(-1.0),
            ..Default::default()
        };
        assert!(ScenarioConfig::resolve(Scenario::Lattice, negative_dt).is_err());
        let range = Overrides {
            k: Some("2..3".parse().unwrap()),
            ..Default::default()
        };
        assert!(ScenarioConfig::resolve(Scenario::Cylinder, range).is_err());
        let full = Overrides {
            full_benchmark: true,
            ..Default::default()
        };
        assert_eq!(ScenarioConfig::resolve(Scenario::Cylinder, full).unwrap().t_end, FULL_BENCHMARK_T_END);
    }
}
