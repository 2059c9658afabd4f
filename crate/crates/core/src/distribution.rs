//! Ground-truth distributions for synthetic streams and accuracy studies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::SQRT_2PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

/// A univariate Gaussian or finite Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Gaussian { mean: f64, std: f64 },
    Mixture { components: Vec<Component> },
}

impl Distribution {
    /// `N(0.4, 0.05)`.
    pub fn unimodal_reference() -> Self {
        Distribution::Gaussian { mean: 0.4, std: 0.05 }
    }

    /// `0.5·N(0.15, 0.05) + 0.5·N(0.55, 0.05)`.
    pub fn bimodal_reference() -> Self {
        Distribution::Mixture {
            components: vec![
                Component {
                    weight: 0.5,
                    mean: 0.15,
                    std: 0.05,
                },
                Component {
                    weight: 0.5,
                    mean: 0.55,
                    std: 0.05,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |mean: f64, std: f64| {
            if !mean.is_finite() {
                return Err(Error::InvalidDistribution(format!("mean {mean} is not finite")));
            }
            if !(std.is_finite() && std > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "standard deviation {std} must be positive"
                )));
            }
            Ok(())
        };
        match self {
            Distribution::Gaussian { mean, std } => check(*mean, *std),
            Distribution::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidDistribution("mixture has no components".into()));
                }
                for c in components {
                    check(c.mean, c.std)?;
                    if !(c.weight.is_finite() && c.weight > 0.0) {
                        return Err(Error::InvalidDistribution(format!(
                            "component weight {} must be positive",
                            c.weight
                        )));
                    }
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidDistribution(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let normal = |mean: f64, std: f64| {
            let z = (x - mean) / std;
            (-0.5 * z * z).exp() / (SQRT_2PI * std)
        };
        match self {
            Distribution::Gaussian { mean, std } => normal(*mean, *std),
            Distribution::Mixture { components } => {
                components.iter().map(|c| c.weight * normal(c.mean, c.std)).sum()
            }
        }
    }

    /// Draws one value. Assumes `validate` has passed.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Gaussian { mean, std } => Normal::new(*mean, *std).expect("validated").sample(rng),
            Distribution::Mixture { components } => {
                let pick: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = components.last().expect("validated");
                for c in components {
                    acc += c.weight;
                    if pick < acc {
                        chosen = c;
                        break;
                    }
                }
                Normal::new(chosen.mean, chosen.std)
                    .expect("validated")
                    .sample(rng)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Gaussian { mean, .. } => *mean,
            Distribution::Mixture { components } => components.iter().map(|c| c.weight * c.mean).sum(),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Gaussian { mean, std } => write!(f, "gaussian:{mean},{std}"),
            Distribution::Mixture { components } => {
                write!(f, "mixture:")?;
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{},{},{}", c.weight, c.mean, c.std)?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `gaussian:MEAN,STD` or `mixture:W,MEAN,STD;W,MEAN,STD;...`.
impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidDistribution(format!("`{s}`: {msg}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing `kind:`"))?;
        let numbers = |part: &str| -> Result<Vec<f64>> {
            part.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
                .collect()
        };
        let dist = match kind.trim() {
            "gaussian" | "normal" => match numbers(rest)?.as_slice() {
                [mean, std] => Distribution::Gaussian {
                    mean: *mean,
                    std: *std,
                },
                _ => return Err(bad("gaussian takes MEAN,STD")),
            },
            "mixture" => {
                let components = rest
                    .split(';')
                    .map(|part| match numbers(part)?.as_slice() {
                        [weight, mean, std] => Ok(Component {
                            weight: *weight,
                            mean: *mean,
                            std: *std,
                        }),
                        _ => Err(bad("mixture components take WEIGHT,MEAN,STD")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Distribution::Mixture { components }
            }
            "bimodal-reference" => Distribution::bimodal_reference(),
            _ => return Err(bad("unknown distribution kind")),
        };
        dist.validate()?;
        Ok(dist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["gaussian:0.4,0.05", "mixture:0.5,0.15,0.05;0.5,0.55,0.05"] {
            let d: Distribution = text.parse().unwrap();
            assert_eq!(d.to_string(), text);
        }
        assert_eq!(
            "mixture:0.5,0.15,0.05;0.5,0.55,0.05"
                .parse::<Distribution>()
                .unwrap(),
            Distribution::bimodal_reference()
        );
    }

    #[test]
    fn invalid_descriptors() {
        assert!("gaussian:0.4,0".parse::<Distribution>().is_err());
        assert!("gaussian:0.4".parse::<Distribution>().is_err());
        assert!("mixture:0.5,0.1,0.05;0.4,0.5,0.05"
            .parse::<Distribution>()
            .is_err());
        assert!("cauchy:0,1".parse::<Distribution>().is_err());
        assert!(Distribution::Mixture { components: vec![] }.validate().is_err());
    }

    #[test]
    fn mixture_pdf_integrates_to_one() {
        let d = Distribution::bimodal_reference();
        let step = 1e-4;
        let total: f64 = (0..20_000).map(|i| d.pdf(-0.5 + i as f64 * step) * step).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mixture_sampling_matches_weights() {
        let d = Distribution::bimodal_reference();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let low = (0..n).filter(|_| d.sample(&mut rng) < 0.35).count();
        let frac = low as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "fraction {frac}");
    }
}
