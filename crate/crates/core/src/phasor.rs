//! Per-unit complex phasors and impedances.
//!
//! Every electrical quantity in the crate (voltages, currents, impedances)
//! is a quasi-static phasor in the inverter reference frame, stored as a
//! [`Complex64`]. The helpers here cover polar construction, angle wrapping
//! and the JSON representation used by scenario files.

use std::f64::consts::{PI, TAU};

pub use num_complex::Complex64;

/// Complex per-unit quantity. dq components map as `i_sd + j·i_sq`.
pub type Phasor = Complex64;

/// Threshold below which a current or impedance magnitude is treated as zero.
pub const ZERO_MAGNITUDE: f64 = 1e-12;

pub fn polar(mag: f64, angle: f64) -> Phasor {
    Complex64::from_polar(mag, angle)
}

pub fn polar_deg(mag: f64, angle_deg: f64) -> Phasor {
    Complex64::from_polar(mag, angle_deg.to_radians())
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Phase angle in (−π, π].
pub fn angle(z: Phasor) -> f64 {
    wrap_angle(z.arg())
}

/// Serde adapter for phasors.
///
/// Serializes as `{"re": .., "im": ..}`. Deserialization additionally
/// accepts the polar form `{"mag": .., "deg": ..}`, which is how most
/// impedance data is published.
pub mod serde_phasor {
    use super::{polar_deg, Phasor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize)]
    struct Rect {
        re: f64,
        im: f64,
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Rect { re: f64, im: f64 },
        Polar { mag: f64, deg: f64 },
    }

    pub fn serialize<S: Serializer>(z: &Phasor, s: S) -> Result<S::Ok, S::Error> {
        Rect { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Phasor, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Rect { re, im } => Phasor::new(re, im),
            Repr::Polar { mag, deg } => polar_deg(mag, deg),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(angle(Phasor::new(-1.0, -0.0)), PI);
    }

    proptest! {
        #[test]
        fn polar_rect_round_trip(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            let z = Phasor::new(re, im);
            let back = polar(z.norm(), angle(z));
            prop_assert!((back - z).norm() < 1e-12);
            let a = angle(z);
            prop_assert!(a > -PI && a <= PI);
            prop_assert!(z.norm() >= 0.0);
        }
    }
}
