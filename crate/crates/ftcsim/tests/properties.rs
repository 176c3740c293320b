//! Randomized invariants over the pulse and drive primitives.

use ftcsim::pulse::{flattop_gaussian, flux_waveform, PulseSpec, ToneSpec};
use ftcsim::special::{bessel_j, bessel_j0, bessel_j2};
use proptest::prelude::*;

proptest! {
    #[test]
    fn envelope_bounded_and_symmetric(
        gate_time in 10.0f64..200.0,
        tau_frac in 0.0f64..0.5,
        t_frac in 0.0f64..1.0,
    ) {
        let tau = tau_frac * gate_time / 2.0;
        let t = t_frac * gate_time;
        let g = flattop_gaussian(t, gate_time, tau).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&g));
        let mirrored = flattop_gaussian(gate_time - t, gate_time, tau).unwrap();
        prop_assert!((g - mirrored).abs() < 1e-9);
    }

    #[test]
    fn waveform_linear_in_tones(
        amp1 in 0.0f64..0.5,
        amp2 in 0.0f64..0.1,
        f1 in 0.05f64..2.0,
        f2 in 0.05f64..2.0,
        t in 0.0f64..40.0,
    ) {
        let mk = |tones: Vec<ToneSpec>| PulseSpec {
            coupler: "c".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones,
            gate_time: 40.0,
        };
        let tone1 = ToneSpec { amplitude: amp1, frequency: f1, ramp_time: 5.0, phase: 0.0 };
        let tone2 = ToneSpec { amplitude: amp2, frequency: f2, ramp_time: 3.0, phase: 0.4 };
        let both = flux_waveform(&mk(vec![tone1.clone(), tone2.clone()]), t);
        let one = flux_waveform(&mk(vec![tone1]), t);
        let two = flux_waveform(&mk(vec![tone2]), t);
        prop_assert!((both + std::f64::consts::FRAC_PI_2 - one - two).abs() < 1e-12);
    }

    #[test]
    fn bessel_recurrence_and_parity(x in 0.01f64..1.5) {
        // J0 + J2 = (2/x) J1
        let lhs = bessel_j0(x) + bessel_j2(x);
        let rhs = 2.0 / x * bessel_j(1, x);
        prop_assert!((lhs - rhs).abs() < 1e-12);
        prop_assert!((bessel_j0(x) - bessel_j0(-x)).abs() < 1e-15);
    }

    #[test]
    fn drive_coefficients_even_and_bounded(phi in 0.0f64..1.5) {
        let dc = ftcsim::drive::jacobi_anger_coefficients(20.322, 5.322, phi).unwrap();
        // alpha interpolates between 0 and E_sum - E_diff
        prop_assert!(dc.alpha >= -1e-12);
        prop_assert!(dc.alpha <= 20.322 - 5.322 + 1e-9);
        // beta vanishes with the modulation
        if phi < 1e-6 {
            prop_assert!(dc.beta.abs() < 1e-9);
        }
    }
}
