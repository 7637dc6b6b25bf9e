//! Numeric output formatting.

/// Formats a value with the given number of significant digits, plain
/// decimal (no exponent notation, no locale).
///
/// Zero prints as `0`; non-finite values print via `f64`'s `Display`.
pub fn format_significant(value: f64, digits: u32) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let formatted = format!("{value:.decimals$}");
    // Rounding can bump the magnitude (0.9999996 -> "1.000000"); reformat
    // once against the rounded value so the digit count stays right.
    let rounded: f64 = formatted.parse().unwrap_or(value);
    if rounded != 0.0 {
        let new_magnitude = rounded.abs().log10().floor() as i32;
        if new_magnitude != magnitude {
            let decimals = (digits as i32 - 1 - new_magnitude).max(0) as usize;
            return format!("{rounded:.decimals$}");
        }
    }
    formatted
}

#[cfg(test)]
mod tests {
    use super::format_significant;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_significant(1.0, 6), "1.00000");
        assert_eq!(format_significant(0.665, 6), "0.665000");
        assert_eq!(format_significant(-1.0986122886681098, 6), "-1.09861");
        assert_eq!(format_significant(0.1, 6), "0.100000");
        assert_eq!(format_significant(97.0, 6), "97.0000");
        assert_eq!(format_significant(0.010101010101, 6), "0.0101010");
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(format_significant(1234567.0, 6), "1234567");
    }

    #[test]
    fn rounding_across_a_power_of_ten() {
        assert_eq!(format_significant(0.9999996, 6), "1.00000");
    }
}
