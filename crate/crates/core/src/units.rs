//! Power unit conversions. Everything inside the library is SI.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(-20.0) - 1e-5).abs() < 1e-18);
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(17.3)) - 17.3).abs() < 1e-12);
    }
}
