//! Writes the synthetic effective-index tables used by the scenario templates.
//!
//! Each mode is described by its phase index, group index and group-velocity
//! dispersion at a reference wavelength:
//! `β(ω) = n_ph ω0/c + n_g (ω−ω0)/c + ½ β2 (ω−ω0)²`.
//!
//! Run: cargo run -p qtwm-core --example synthetic_dispersion -- crates/cli/templates/data

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use qtwm_core::constants::SPEED_OF_LIGHT as C;

struct Mode {
    file: &'static str,
    wavelength: f64,
    phase_index: f64,
    group_index: f64,
    gvd: f64,
}

const MODES: &[Mode] = &[
    // Type-II pair with symmetric group-velocity mismatch.
    Mode { file: "sm_psg_pump.csv", wavelength: 775e-9, phase_index: 2.180, group_index: 2.300, gvd: 3.0e-25 },
    Mode { file: "sm_psg_signal.csv", wavelength: 1550e-9, phase_index: 2.140, group_index: 2.250, gvd: 1.0e-25 },
    Mode { file: "sm_psg_idler.csv", wavelength: 1550e-9, phase_index: 2.210, group_index: 2.350, gvd: 1.2e-25 },
    // Type-0, one mode for both halves of the spectrum, group velocity matched to the pump.
    Mode { file: "bsvg_pump.csv", wavelength: 775e-9, phase_index: 2.150, group_index: 2.260, gvd: 3.0e-25 },
    Mode { file: "bsvg_signal.csv", wavelength: 1550e-9, phase_index: 2.140, group_index: 2.260, gvd: 2.0e-26 },
    // Signal and pump group velocity matched.
    Mode { file: "qfc_pump.csv", wavelength: 1300e-9, phase_index: 2.150, group_index: 2.250, gvd: 1.0e-25 },
    Mode { file: "qfc_signal.csv", wavelength: 1550e-9, phase_index: 2.140, group_index: 2.250, gvd: 1.0e-25 },
    Mode {
        file: "qfc_idler.csv",
        wavelength: 1.0 / (1.0 / 1550e-9 + 1.0 / 1300e-9),
        phase_index: 2.140,
        group_index: 2.450,
        gvd: 2.0e-25,
    },
];

fn table(mode: &Mode) -> String {
    let w0 = 2.0 * PI * C / mode.wavelength;
    let beta = |w: f64| {
        let d = w - w0;
        mode.phase_index * w0 / C + mode.group_index * d / C + 0.5 * mode.gvd * d * d
    };
    let mut out = String::new();
    writeln!(
        out,
        "# synthetic mode: n_ph={} n_g={} gvd={:e} s^2/m at {:e} m",
        mode.phase_index, mode.group_index, mode.gvd, mode.wavelength
    )
    .unwrap();
    writeln!(out, "lambda_m,n_eff").unwrap();
    let count = 401;
    for k in 0..count {
        // Long to short wavelength.
        let w = w0 * (0.65 + 0.7 * k as f64 / (count - 1) as f64);
        writeln!(out, "{:.12e},{:.15}", 2.0 * PI * C / w, beta(w) * C / w).unwrap();
    }
    out
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/templates/data".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");
    for mode in MODES {
        let path = dir.join(mode.file);
        std::fs::write(&path, table(mode)).expect("write table");
        println!("{}", path.display());
    }
}
