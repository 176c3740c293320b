//! Flux-pulse parameterization: flattop-Gaussian envelopes and one- or
//! two-tone modulation of a coupler's external flux.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum PulseError {
    #[error("ramps overlap: 2 tau = {0} ns exceeds the gate time {1} ns")]
    BadRamp(f64, f64),
    #[error("a pulse needs one or two tones, got {0}")]
    BadToneCount(usize),
    #[error("tone parameters out of range: {0}")]
    BadTone(String),
}

/// One modulation tone with a flattop-Gaussian envelope.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToneSpec {
    /// Modulation amplitude in radians of external flux.
    pub amplitude: f64,
    /// Linear drive frequency in GHz.
    pub frequency: f64,
    /// Envelope ramp time tau in ns.
    pub ramp_time: f64,
    /// Carrier phase in radians.
    #[serde(default)]
    pub phase: f64,
}

/// Total flux program applied to one coupler.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PulseSpec {
    /// Driven coupler node name.
    pub coupler: String,
    /// Static bias in radians (pi/2 at the lower sweet spot).
    pub dc_offset: f64,
    pub tones: Vec<ToneSpec>,
    /// Total gate window in ns (ramps included).
    pub gate_time: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<(), PulseError> {
        if self.tones.is_empty() || self.tones.len() > 2 {
            return Err(PulseError::BadToneCount(self.tones.len()));
        }
        for t in &self.tones {
            if t.amplitude < 0.0 {
                return Err(PulseError::BadTone(format!("amplitude {}", t.amplitude)));
            }
            if t.frequency <= 0.0 {
                return Err(PulseError::BadTone(format!("frequency {}", t.frequency)));
            }
            if 2.0 * t.ramp_time > self.gate_time {
                return Err(PulseError::BadRamp(2.0 * t.ramp_time, self.gate_time));
            }
        }
        Ok(())
    }
}

/// Flattop Gaussian envelope: Gaussian rise of standard deviation tau/2.5
/// centered at t = tau, unit plateau, mirrored fall. The Gaussian baseline is
/// subtracted so the envelope starts and ends at exactly zero (an abrupt
/// percent-level switch-off would leave the driven coupler displaced).
pub fn flattop_gaussian(t: f64, gate_time: f64, tau: f64) -> Result<f64, PulseError> {
    if 2.0 * tau > gate_time {
        return Err(PulseError::BadRamp(2.0 * tau, gate_time));
    }
    if tau <= 0.0 {
        return Ok(1.0);
    }
    let sigma = tau / 2.5;
    let edge = (-tau * tau / (2.0 * sigma * sigma)).exp();
    let ramp = |u: f64| ((-u * u / (2.0 * sigma * sigma)).exp() - edge) / (1.0 - edge);
    let v = if t < tau {
        ramp(t - tau)
    } else if t <= gate_time - tau {
        1.0
    } else {
        ramp(t - (gate_time - tau))
    };
    Ok(v)
}

/// Total external flux of the driven coupler at time `t`.
pub fn flux_waveform(p: &PulseSpec, t: f64) -> f64 {
    let mut phi = p.dc_offset;
    for tone in &p.tones {
        let g = flattop_gaussian(t, p.gate_time, tone.ramp_time).unwrap_or(0.0);
        phi += g
            * tone.amplitude
            * (std::f64::consts::TAU * tone.frequency * t + tone.phase).cos();
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(amplitude: f64, frequency: f64, ramp: f64) -> ToneSpec {
        ToneSpec { amplitude, frequency, ramp_time: ramp, phase: 0.0 }
    }

    #[test]
    fn plateau_is_unity_and_edges_vanish() {
        let g = flattop_gaussian(20.0, 40.0, 8.0).unwrap();
        assert_eq!(g, 1.0);
        let e = flattop_gaussian(0.0, 40.0, 8.0).unwrap();
        assert!(e.abs() < 1e-15);
        assert!(flattop_gaussian(40.0, 40.0, 8.0).unwrap().abs() < 1e-15);
        // continuous into the plateau
        let near = flattop_gaussian(7.999, 40.0, 8.0).unwrap();
        assert!((near - 1.0).abs() < 1e-6);
    }

    #[test]
    fn envelope_time_symmetric() {
        for t in [0.0, 3.0, 7.9, 12.0, 19.0] {
            let a = flattop_gaussian(t, 38.0, 8.0).unwrap();
            let b = flattop_gaussian(38.0 - t, 38.0, 8.0).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_ramp_limit_is_rectangular() {
        for t in [0.0, 1.0, 20.0, 39.9] {
            assert!((flattop_gaussian(t, 40.0, 0.0).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bad_ramp_rejected() {
        assert!(matches!(flattop_gaussian(1.0, 10.0, 6.0), Err(PulseError::BadRamp(..))));
        let p = PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![tone(0.2, 0.18, 30.0)],
            gate_time: 40.0,
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn waveform_zero_amplitude_is_constant() {
        let p = PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![tone(0.0, 0.18, 5.0)],
            gate_time: 40.0,
        };
        for t in [0.0, 13.0, 40.0] {
            assert!((flux_waveform(&p, t) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        }
    }

    #[test]
    fn waveform_edge_suppressed_and_additive() {
        let one = PulseSpec {
            coupler: "c1".into(),
            dc_offset: std::f64::consts::FRAC_PI_2,
            tones: vec![tone(0.3, 0.18, 6.0)],
            gate_time: 40.0,
        };
        let dev = (flux_waveform(&one, 0.0) - std::f64::consts::FRAC_PI_2).abs();
        assert!(dev < 1e-12);

        let two = PulseSpec {
            tones: vec![tone(0.3, 0.18, 6.0), tone(0.02, 0.35, 4.0)],
            ..one.clone()
        };
        for t in [3.0, 17.5, 31.0] {
            let a = flux_waveform(&one, t);
            let extra = flattop_gaussian(t, 40.0, 4.0).unwrap()
                * 0.02
                * (std::f64::consts::TAU * 0.35 * t).cos();
            assert!((flux_waveform(&two, t) - a - extra).abs() < 1e-14);
        }
    }
}
