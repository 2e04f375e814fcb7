use std::path::Path;

use daps::coincidence::derive_seed;
use daps::fockcore::FrontendConfig;
use daps::simulator::{heralded_pdc_state, scan_experiment, Imbalance, MultiplexConfig};
use daps::StateSpec;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::io::{stem, with_herald_suffix, write_json};

const HERALD_STREAM: u64 = 4;

pub fn run(
    config: &Path,
    output: &Path,
    seed: Option<u64>,
    khs: Option<Vec<usize>>,
) -> CliResult<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(k) = khs {
        match cfg.heralding.as_mut() {
            Some(h) => h.outcomes = k,
            None => return Err(CliError::Config("--khs needs a [heralding] section".into())),
        }
        cfg.validate()?;
    }
    let multiplex = multiplex(&cfg)?;
    let amplitudes = cfg.lo.amplitudes()?;
    let label = cfg.label.clone().unwrap_or_else(|| stem(output));
    match (&cfg.state, &cfg.heralding) {
        (Some(state), _) => {
            let mut dataset =
                scan_experiment(state, &multiplex, &amplitudes, cfg.trials, cfg.seed)?;
            dataset.metadata.detector = Some(cfg.detector.clone());
            dataset.metadata.label = Some(label);
            write_json(output, &dataset)
        }
        (None, Some(h)) => {
            let herald = h.detector.response_matrix(cfg.n_max)?;
            for &k in &h.outcomes {
                let heralded =
                    heralded_pdc_state(h.squeezing, h.transmittance, &herald, k, cfg.n_max)?;
                let state: StateSpec = heralded.state();
                let seed = derive_seed(cfg.seed, HERALD_STREAM, k as u64);
                let mut dataset =
                    scan_experiment(&state, &multiplex, &amplitudes, cfg.trials, seed)?;
                dataset.metadata.detector = Some(cfg.detector.clone());
                dataset.metadata.label = Some(format!("{label} k_h={k}"));
                dataset.metadata.heralding_outcome = Some(k);
                dataset.metadata.heralding_probability = Some(heralded.probability);
                write_json(&with_herald_suffix(output, k), &dataset)?;
            }
            Ok(())
        }
        (None, None) => Err(CliError::Config("missing `state` (or `heralding`)".into())),
    }
}

fn multiplex(cfg: &ExperimentConfig) -> CliResult<MultiplexConfig<f64>> {
    let frontend = FrontendConfig::from_transmittance(cfg.frontend.transmittance, cfg.n_max)?;
    let detector = cfg.detector.response_matrix(cfg.n_max)?;
    let mut multiplex = MultiplexConfig::new(cfg.depth, frontend, detector)?;
    if let Some(im) = &cfg.imbalance {
        let detectors = match &im.efficiency_scales {
            Some(scales) => Some(
                scales
                    .iter()
                    .map(|&s| {
                        cfg.detector
                            .with_efficiency_scale(s)
                            .response_matrix(cfg.n_max)
                    })
                    .collect::<daps::Result<Vec<_>>>()?,
            ),
            None => None,
        };
        multiplex = multiplex.with_imbalance(Imbalance {
            split_weights: im.split_weights.clone(),
            detectors,
        })?;
    }
    Ok(multiplex)
}
