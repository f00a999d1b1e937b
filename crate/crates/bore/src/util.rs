//! Small shared helpers.

/// Fixed-width float formatting with 17 significant digits, enough for exact
/// f64 round-trips and byte-stable output files.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips() {
        for &x in &[0.1, -3.5e-17, std::f64::consts::PI, 1.0 / 3.0, 2f64.powi(-40)] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
