//! dB conversions. Everything past the I/O boundary is linear.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts) + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dbm_reference_points() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-60.0) - 1e-9).abs() < 1e-24);
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn db_round_trip(x in -200.0f64..200.0) {
            prop_assert!((linear_to_db(db_to_linear(x)) - x).abs() <= 1e-12);
        }
    }
}
