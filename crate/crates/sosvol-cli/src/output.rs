//! Deterministic text output: every float is printed with 17 significant
//! digits so repeated runs with the same seed produce byte-identical files.

pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(std::f64::consts::PI), "3.1415926535897931e0");
        assert_eq!(fmt17(f64::NAN), "NaN");
    }
}
