//! Fixed 12-significant-digit decimal formatting for CSV exports.
//!
//! The same float always renders to the same bytes, and rendering is stable
//! under a parse/re-render round trip.

pub(crate) fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn renders_twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(0.5), "0.500000000000");
        assert_eq!(sig12(0.64505), "0.645050000000");
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(3.25), "3.25000000000");
        assert_eq!(sig12(10.0), "10.0000000000");
    }

    #[test]
    fn parse_then_render_is_stable() {
        for &v in &[0.1, 0.3333333333333333, 0.64505, 0.999999, 7.25, 1e-4] {
            let s = sig12(v);
            let reparsed: f64 = s.parse().unwrap();
            assert_eq!(sig12(reparsed), s);
        }
    }
}
