use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Signal state entering the unbalanced homodyning beam splitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum,
    Fock {
        photons: usize,
    },
    Coherent {
        re: f64,
        #[serde(default)]
        im: f64,
        /// Average over the global phase of the amplitude.
        #[serde(default)]
        phase_randomized: bool,
    },
    Thermal {
        mean_photons: f64,
    },
    /// Photon-number diagonal state with weights `P_n`, `n = 0, 1, ...`.
    FockMixture {
        weights: Vec<f64>,
    },
    /// Convex combination of other states.
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: StateSpec,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl StateSpec {
    pub fn coherent(re: f64, im: f64) -> Self {
        StateSpec::Coherent {
            re,
            im,
            phase_randomized: false,
        }
    }

    pub fn phase_randomized_coherent(amplitude: f64) -> Self {
        StateSpec::Coherent {
            re: amplitude,
            im: 0.0,
            phase_randomized: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Vacuum | StateSpec::Fock { .. } => Ok(()),
            StateSpec::Coherent { re, im, .. } => {
                if re.is_finite() && im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(
                        "coherent amplitude must be finite".into(),
                    ))
                }
            }
            StateSpec::Thermal { mean_photons } => {
                if mean_photons.is_finite() && *mean_photons >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "thermal mean photon number must be >= 0, got {mean_photons}"
                    )))
                }
            }
            StateSpec::FockMixture { weights } => {
                check_weights(weights.iter().copied(), "Fock mixture")
            }
            StateSpec::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidArgument("mixture has no components".into()));
                }
                check_weights(components.iter().map(|c| c.weight), "mixture")?;
                components.iter().try_for_each(|c| c.state.validate())
            }
        }
    }

    /// True when the Glauber-Sudarshan P function is known to be nonnegative.
    pub fn is_classical(&self) -> bool {
        match self {
            StateSpec::Vacuum | StateSpec::Coherent { .. } | StateSpec::Thermal { .. } => true,
            StateSpec::Fock { photons } => *photons == 0,
            StateSpec::FockMixture { weights } => weights.iter().skip(1).all(|&w| w == 0.0),
            StateSpec::Mixture { components } => components
                .iter()
                .all(|c| c.weight == 0.0 || c.state.is_classical()),
        }
    }

    /// True when the state is invariant under phase rotations, so its
    /// click statistics cannot depend on the LO phase.
    pub fn is_rotation_invariant(&self) -> bool {
        match self {
            StateSpec::Coherent {
                re,
                im,
                phase_randomized,
            } => *phase_randomized || (*re == 0.0 && *im == 0.0),
            StateSpec::Mixture { components } => {
                components.iter().all(|c| c.state.is_rotation_invariant())
            }
            _ => true,
        }
    }
}

fn check_weights(weights: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut sum = 0.0;
    for w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{what} weight {w} is not >= 0"
            )));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "{what} weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(StateSpec::Thermal { mean_photons: -1.0 }
            .validate()
            .is_err());
        assert!(StateSpec::FockMixture {
            weights: vec![0.5, 0.6]
        }
        .validate()
        .is_err());
        assert!(StateSpec::FockMixture {
            weights: vec![0.5, -0.5, 1.0]
        }
        .validate()
        .is_err());
        let mix = StateSpec::Mixture {
            components: vec![
                MixtureComponent {
                    weight: 0.3,
                    state: StateSpec::Vacuum,
                },
                MixtureComponent {
                    weight: 0.7,
                    state: StateSpec::Fock { photons: 1 },
                },
            ],
        };
        assert!(mix.validate().is_ok());
        assert!(!mix.is_classical());
        assert!(StateSpec::coherent(1.0, 0.0).is_classical());
        assert!(!StateSpec::coherent(1.0, 0.0).is_rotation_invariant());
        assert!(StateSpec::phase_randomized_coherent(1.0).is_rotation_invariant());
    }

    #[test]
    fn serde_tagging() {
        let s: StateSpec =
            serde_json::from_str(r#"{"kind":"coherent","re":0.5,"phase_randomized":true}"#)
                .unwrap();
        assert_eq!(s, StateSpec::phase_randomized_coherent(0.5));
    }
}
