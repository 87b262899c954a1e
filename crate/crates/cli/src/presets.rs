//! Canned configurations reproducing the reference BER studies.

use crate::config::FileConfig;

pub struct NamedRun {
    /// File stem for the emitted CSV and manifest.
    pub name: &'static str,
    pub config: FileConfig,
}

pub const PRESET_NAMES: [&str; 5] = ["fig4", "fig5", "fig6", "fig8", "fig9"];

fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

fn run(
    name: &'static str,
    kind: &str,
    order: usize,
    blocks: usize,
    leds: usize,
    pds: usize,
    snr_db: Vec<f64>,
) -> NamedRun {
    let mut c = FileConfig::default();
    c.scheme.kind = kind.into();
    c.scheme.order = order;
    c.scheme.parallel_blocks = blocks;
    c.transmitter.count = leds;
    c.receiver.count = pds;
    c.sim.snr_db = snr_db;
    NamedRun { name, config: c }
}

/// Returns the runs of a named preset, or `None` if the name is unknown.
pub fn bundle(preset: &str) -> Option<Vec<NamedRun>> {
    Some(match preset {
        // Stream schemes versus polarity splitting at 2 bpcu over two LEDs.
        "fig4" => {
            let snr = || grid(10.0, 2.0, 48.0);
            let mut dco = run("fig4_dco", "dco", 4, 2, 2, 2, snr());
            dco.config.scheme.bias_db = 7.0;
            vec![
                dco,
                run("fig4_aco", "aco", 16, 2, 2, 2, snr()),
                run("fig4_flip", "flip", 16, 2, 2, 2, snr()),
                run("fig4_ndc", "ndc", 16, 1, 2, 2, snr()),
            ]
        }
        // Polarity splitting versus index modulation at matched 4 and
        // 5 bpcu.
        "fig5" => {
            let snr = || grid(20.0, 2.0, 60.0);
            vec![
                run("fig5_ndc_eta4", "ndc", 256, 1, 2, 4, snr()),
                run("fig5_indc_eta4", "indc", 64, 1, 4, 4, snr()),
                run("fig5_ndc_eta5", "ndc", 1024, 1, 2, 4, snr()),
                run("fig5_indc_eta5", "indc", 256, 1, 4, 4, snr()),
            ]
        }
        // LED spacing sweep for the indexed scheme at three SNRs.
        "fig6" => {
            let mut r = run("fig6_indc_dtx", "indc", 64, 1, 4, 4, vec![25.0, 35.0, 45.0]);
            r.config.sim.d_tx = Some(grid(0.5, 0.25, 4.5));
            vec![r]
        }
        // Index versus modulation bit reliability, with the error-free
        // index-bit genie and the plain polarity-split reference.
        "fig8" => {
            let snr = || grid(20.0, 2.0, 50.0);
            let mut genie = run("fig8_indc_genie", "indc", 64, 1, 4, 4, snr());
            genie.config.sim.genie_index = true;
            vec![
                run("fig8_indc", "indc", 64, 1, 4, 4, snr()),
                genie,
                run("fig8_ndc", "ndc", 256, 1, 2, 4, snr()),
            ]
        }
        // Coded index bits versus polarity splitting at matched ~3.9 bpcu.
        "fig9" => {
            let snr = || grid(20.0, 2.0, 54.0);
            vec![
                run("fig9_ndc", "ndc", 256, 1, 2, 4, snr()),
                run("fig9_cindc", "cindc", 128, 1, 4, 4, snr()),
            ]
        }
        _ => return None,
    })
}
