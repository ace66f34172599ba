//! Seeded experiment campaigns over Haar random codes.
//!
//! The harness turns a [`SweepConfig`] grid into one record per
//! (grid point, seed), derives every task seed from the master seed with a
//! counter-based mix, and runs the tasks on a thread pool whose size never
//! affects the output: rerunning a sweep with any worker count yields
//! byte-identical CSV except for the elapsed-time column.
//!
//! Beyond sweeps it bundles the statistical cross-checks the library's
//! claims rest on: Gaussian moment identities of the shifted ensemble, the
//! stability of the shifted basis under the isometrize rounding, and the
//! end-to-end erasure experiment.

mod config;
mod erasure;
mod fit;
mod moments;
mod plot;
mod stability;
mod sweep;

pub use config::{Check, ErrorSetSpec, GridPoint, SweepConfig};
pub use erasure::{erasure_experiment, ErasureReport, ErasureTrial};
pub use fit::{fit_scaling, ScalingFit};
pub use moments::{moment_check, MomentReport};
pub use plot::scaling_plot_svg;
pub use stability::{isometrize_stability_run, StabilityReport};
pub use sweep::{csv_without_elapsed, records_to_csv, run_sweep, SweepOutput, SweepRecord};

/// Floats in CSV output carry 17 significant digits, enough to round-trip
/// any double exactly.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for x in [0.25f64, 1.0 / 3.0, 6.02e23, -1.7e-308, 0.0] {
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_g17(f64::NAN), "NaN");
    }
}
