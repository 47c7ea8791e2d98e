//! Flat key/value experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment and blank lines are
//! skipped. Keys before the first `solver` line describe the dataset and the
//! experiment; each `solver = <name>` line opens an entry whose following
//! keys (`eta`, `epoch_length`, `ht_per_epoch`) apply to that entry until
//! the next `solver` line.

use std::path::PathBuf;

use rgrasp::{Covariance, LossKind, SyntheticSpec};

use crate::{Error, Result};

/// Where an experiment's data comes from. Synthetic instances are
/// regenerated from each run seed, so every seed sees a fresh draw; file
/// datasets are loaded once and shared.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic {
        n: usize,
        d: usize,
        s_star: usize,
        covariance: Covariance,
        noise_variance: f64,
    },
    File {
        path: PathBuf,
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverName {
    /// Pursuit with the exact restricted minimizer.
    Grasp,
    /// Pursuit with plain semi-stochastic epochs.
    Svrgsp,
    /// Pursuit with periodically thresholded epochs.
    SvrgspPlus,
    /// Variance-reduced epochs, thresholding every step.
    Svrght,
    /// Stochastic gradient, thresholding every step.
    Sght,
    /// Full gradient, thresholding every iteration.
    Fght,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Grasp => "grasp",
            SolverName::Svrgsp => "svrgsp",
            SolverName::SvrgspPlus => "svrgsp+",
            SolverName::Svrght => "svrght",
            SolverName::Sght => "sght",
            SolverName::Fght => "fght",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "grasp" => SolverName::Grasp,
            "svrgsp" => SolverName::Svrgsp,
            "svrgsp+" | "svrgsp_plus" => SolverName::SvrgspPlus,
            "svrght" => SolverName::Svrght,
            "sght" => SolverName::Sght,
            "fght" => SolverName::Fght,
            _ => return None,
        })
    }
}

impl std::fmt::Display for SolverName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A step size: pinned, or tuned over the standard grid {2⁻¹⁰..2⁻¹}/L̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaSpec {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverEntry {
    pub name: SolverName,
    pub eta: EtaSpec,
    /// Inner iterations per epoch; 0 means one pass (J = n).
    pub epoch_length: usize,
    /// Thresholding events per fast-mode epoch.
    pub ht_per_epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub objective: LossKind,
    pub sparsity: usize,
    pub pass_budget: f64,
    /// Run seeds. A seed drives the synthetic draw and the solver's sample
    /// stream; file datasets use it for the sample stream only.
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverEntry>,
    /// Record wall time. Off by default so tables are byte-reproducible.
    pub timing: bool,
    pub out: Option<PathBuf>,
}

struct Parser<'a> {
    origin: &'a str,
}

impl Parser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| self.err(line, format!("invalid value `{value}` for {key}")))
    }
}

/// Parses an experiment config; `origin` labels error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let p = Parser { origin };

    let mut kind: Option<&str> = None;
    let mut n = None;
    let mut d = None;
    let mut s_star = None;
    let mut covariance = Covariance::Identity;
    let mut noise_variance = 0.0;
    let mut path: Option<PathBuf> = None;
    let mut dim = None;
    let mut objective = LossKind::LeastSquares;
    let mut sparsity = None;
    let mut pass_budget = None;
    let mut seeds: Vec<u64> = vec![0];
    let mut timing = false;
    let mut out: Option<PathBuf> = None;
    let mut solvers: Vec<SolverEntry> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| p.err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(p.err(line, format!("missing value for {key}")));
        }

        if let Some(entry) = solvers.last_mut() {
            match key {
                "eta" => {
                    entry.eta = if value == "auto" {
                        EtaSpec::Auto
                    } else {
                        EtaSpec::Fixed(p.parse(line, key, value)?)
                    };
                    continue;
                }
                "epoch_length" => {
                    entry.epoch_length = p.parse(line, key, value)?;
                    continue;
                }
                "ht_per_epoch" => {
                    entry.ht_per_epoch = p.parse(line, key, value)?;
                    continue;
                }
                "solver" => {}
                _ => {
                    return Err(p.err(
                        line,
                        format!("unknown solver key `{key}` (solver entries accept eta, epoch_length, ht_per_epoch)"),
                    ))
                }
            }
        }

        match key {
            "solver" => {
                let name = SolverName::parse(value)
                    .ok_or_else(|| p.err(line, format!("unknown solver `{value}`")))?;
                let eta = if name == SolverName::Grasp {
                    EtaSpec::Fixed(0.0)
                } else {
                    EtaSpec::Auto
                };
                solvers.push(SolverEntry {
                    name,
                    eta,
                    epoch_length: 0,
                    ht_per_epoch: 6,
                });
            }
            "data" => kind = Some(value),
            "n" => n = Some(p.parse(line, key, value)?),
            "d" => d = Some(p.parse(line, key, value)?),
            "s_star" => s_star = Some(p.parse(line, key, value)?),
            "covariance" => covariance = parse_covariance(&p, line, value)?,
            "noise_variance" => noise_variance = p.parse(line, key, value)?,
            "path" => path = Some(PathBuf::from(value)),
            "dim" => dim = Some(p.parse(line, key, value)?),
            "objective" => {
                objective = match value {
                    "least_squares" => LossKind::LeastSquares,
                    "logistic" => LossKind::Logistic,
                    _ => return Err(p.err(line, format!("unknown objective `{value}`"))),
                }
            }
            "sparsity" => sparsity = Some(p.parse(line, key, value)?),
            "pass_budget" => pass_budget = Some(p.parse(line, key, value)?),
            "seeds" => {
                seeds = value
                    .split(',')
                    .map(|s| p.parse(line, key, s.trim()))
                    .collect::<Result<_>>()?;
            }
            "timing" => timing = p.parse(line, key, value)?,
            "out" => out = Some(PathBuf::from(value)),
            _ => return Err(p.err(line, format!("unknown key `{key}`"))),
        }
    }

    let source = match kind {
        Some("synthetic") => DataSource::Synthetic {
            n: n.ok_or_else(|| p.err(0, "synthetic data needs `n`"))?,
            d: d.ok_or_else(|| p.err(0, "synthetic data needs `d`"))?,
            s_star: s_star.ok_or_else(|| p.err(0, "synthetic data needs `s_star`"))?,
            covariance,
            noise_variance,
        },
        Some("file") => DataSource::File {
            path: path.ok_or_else(|| p.err(0, "file data needs `path`"))?,
            dim,
        },
        Some(other) => return Err(p.err(0, format!("unknown data kind `{other}`"))),
        None => return Err(p.err(0, "missing `data = synthetic|file`")),
    };
    let cfg = ExperimentConfig {
        source,
        objective,
        sparsity: sparsity.ok_or_else(|| p.err(0, "missing `sparsity`"))?,
        pass_budget: pass_budget.ok_or_else(|| p.err(0, "missing `pass_budget`"))?,
        seeds,
        solvers,
        timing,
        out,
    };
    if cfg.solvers.is_empty() {
        return Err(p.err(0, "at least one `solver = <name>` entry is required"));
    }
    if !(cfg.pass_budget >= 0.0 && cfg.pass_budget.is_finite()) {
        return Err(p.err(0, "pass_budget must be finite and nonnegative"));
    }
    if cfg.seeds.is_empty() {
        return Err(p.err(0, "seeds must not be empty"));
    }
    Ok(cfg)
}

fn parse_covariance(p: &Parser, line: usize, value: &str) -> Result<Covariance> {
    if value == "identity" {
        return Ok(Covariance::Identity);
    }
    if let Some(rho) = value.strip_prefix("uniform:") {
        let rho = p.parse(line, "covariance", rho)?;
        return Ok(Covariance::UniformOffDiag { rho });
    }
    Err(p.err(
        line,
        format!("unknown covariance `{value}` (expected identity or uniform:<rho>)"),
    ))
}

/// Parses the generator parameters used by `bench gen`: the synthetic keys
/// of the experiment grammar plus `seed`.
pub fn parse_synthetic(text: &str, origin: &str) -> Result<SyntheticSpec> {
    let p = Parser { origin };
    let mut n = None;
    let mut d = None;
    let mut s_star = None;
    let mut covariance = Covariance::Identity;
    let mut noise_variance = 0.0;
    let mut seed = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| p.err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n" => n = Some(p.parse(line, key, value)?),
            "d" => d = Some(p.parse(line, key, value)?),
            "s_star" => s_star = Some(p.parse(line, key, value)?),
            "covariance" => covariance = parse_covariance(&p, line, value)?,
            "noise_variance" => noise_variance = p.parse(line, key, value)?,
            "seed" => seed = p.parse(line, key, value)?,
            _ => return Err(p.err(line, format!("unknown key `{key}`"))),
        }
    }
    Ok(SyntheticSpec {
        n: n.ok_or_else(|| p.err(0, "missing `n`"))?,
        d: d.ok_or_else(|| p.err(0, "missing `d`"))?,
        s_star: s_star.ok_or_else(|| p.err(0, "missing `s_star`"))?,
        covariance,
        noise_variance,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
# scaled noisy instance
data = synthetic
n = 500
d = 1000
s_star = 50
covariance = uniform:0.1
noise_variance = 0.01
sparsity = 60
pass_budget = 30
seeds = 1, 2, 3

solver = svrgsp
eta = 0.011
epoch_length = 125
solver = sght
";

    #[test]
    fn parses_a_full_config() {
        let cfg = parse_config(BASE, "test").unwrap();
        assert_eq!(
            cfg.source,
            DataSource::Synthetic {
                n: 500,
                d: 1000,
                s_star: 50,
                covariance: Covariance::UniformOffDiag { rho: 0.1 },
                noise_variance: 0.01,
            }
        );
        assert_eq!(cfg.sparsity, 60);
        assert_eq!(cfg.pass_budget, 30.0);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert!(!cfg.timing);
        assert_eq!(cfg.solvers.len(), 2);
        assert_eq!(cfg.solvers[0].name, SolverName::Svrgsp);
        assert_eq!(cfg.solvers[0].eta, EtaSpec::Fixed(0.011));
        assert_eq!(cfg.solvers[0].epoch_length, 125);
        assert_eq!(cfg.solvers[1].name, SolverName::Sght);
        assert_eq!(cfg.solvers[1].eta, EtaSpec::Auto);
        assert_eq!(cfg.solvers[1].ht_per_epoch, 6);
    }

    #[test]
    fn file_sources_and_overrides() {
        let text = "\
data = file
path = data/rcv1.svm
dim = 47236
objective = logistic
sparsity = 200
pass_budget = 30
out = rcv1.csv
timing = true
solver = svrgsp+
";
        let cfg = parse_config(text, "test").unwrap();
        assert_eq!(
            cfg.source,
            DataSource::File {
                path: PathBuf::from("data/rcv1.svm"),
                dim: Some(47236),
            }
        );
        assert_eq!(cfg.objective, LossKind::Logistic);
        assert!(cfg.timing);
        assert_eq!(cfg.out, Some(PathBuf::from("rcv1.csv")));
        assert_eq!(cfg.solvers[0].name, SolverName::SvrgspPlus);
        assert_eq!(cfg.seeds, vec![0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("data = synthetic\nbogus\n", 2, "expected `key = value`"),
            ("wat = 1\n", 1, "unknown key"),
            ("data = synthetic\nn = x\n", 2, "invalid value"),
            ("solver = brr\n", 1, "unknown solver"),
            ("solver = sght\nn = 5\n", 2, "unknown solver key"),
            ("covariance = toeplitz\n", 1, "unknown covariance"),
            ("objective = hinge\n", 1, "unknown objective"),
        ];
        for (text, line, needle) in cases {
            match parse_config(text, "test") {
                Err(Error::Config {
                    line: got, message, ..
                }) => {
                    assert_eq!(got, line, "{text:?}");
                    assert!(message.contains(needle), "{text:?} → {message}");
                }
                other => panic!("{text:?} → {other:?}"),
            }
        }
    }

    #[test]
    fn missing_required_keys_are_rejected() {
        for (text, needle) in [
            ("sparsity = 5\npass_budget = 1\nsolver = sght\n", "missing `data"),
            ("data = synthetic\nn = 5\nd = 5\ns_star = 1\npass_budget = 1\nsolver = sght\n", "missing `sparsity`"),
            ("data = synthetic\nn = 5\nd = 5\ns_star = 1\nsparsity = 1\npass_budget = 1\n", "at least one"),
            ("data = file\nsparsity = 1\npass_budget = 1\nsolver = sght\n", "needs `path`"),
            ("data = synthetic\nd = 5\ns_star = 1\nsparsity = 1\npass_budget = 1\nsolver = sght\n", "needs `n`"),
        ] {
            let err = parse_config(text, "test").unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?} → {err}");
        }
    }

    #[test]
    fn generator_spec_round_trips() {
        let spec = parse_synthetic(
            "n = 40\nd = 80\ns_star = 4\ncovariance = uniform:0.3\nnoise_variance = 0.5\nseed = 9\n",
            "test",
        )
        .unwrap();
        assert_eq!(
            spec,
            SyntheticSpec {
                n: 40,
                d: 80,
                s_star: 4,
                covariance: Covariance::UniformOffDiag { rho: 0.3 },
                noise_variance: 0.5,
                seed: 9,
            }
        );
        assert!(parse_synthetic("n = 4\nd = 8\n", "test").is_err());
    }
}
