//! Decibel conversions, used only at the I/O boundary.
//!
//! The whole core works in linear units (watts, linear SINR); configs and
//! result files may carry dB / dBm values which are converted on load and on
//! emission.

/// dB ratio to linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to dB. Nonpositive input maps to `-inf`.
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        assert!((db_to_linear(8.0) - 6.309573444801933).abs() < 1e-12);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-24);
        assert!((watts_to_dbm(dbm_to_watts(17.3)) - 17.3).abs() < 1e-10);
        assert!((linear_to_db(db_to_linear(-4.2)) + 4.2).abs() < 1e-10);
    }
}
