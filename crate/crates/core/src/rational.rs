//! Exact ratios and their decimal rendering.

use num_rational::Ratio;

pub type Rational = Ratio<u64>;

/// Renders `r` with exactly `places` fractional digits, rounding half to even.
pub fn to_decimal(r: &Rational, places: u32) -> String {
    let num = *r.numer() as u128;
    let den = *r.denom() as u128;
    let scale = 10u128.pow(places);
    let scaled = num * scale;
    let mut q = scaled / den;
    let rem = scaled % den;
    // compare rem/den against 1/2
    match (2 * rem).cmp(&den) {
        std::cmp::Ordering::Greater => q += 1,
        std::cmp::Ordering::Equal if q % 2 == 1 => q += 1,
        _ => {}
    }
    let int = q / scale;
    if places == 0 {
        return int.to_string();
    }
    let frac = q % scale;
    format!("{int}.{frac:0width$}", width = places as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(to_decimal(&Rational::new(8, 11), 6), "0.727273");
        assert_eq!(to_decimal(&Rational::new(1, 2), 6), "0.500000");
        assert_eq!(to_decimal(&Rational::new(1, 1), 3), "1.000");
        // ties go to even
        assert_eq!(to_decimal(&Rational::new(1, 8), 2), "0.12");
        assert_eq!(to_decimal(&Rational::new(3, 8), 2), "0.38");
        assert_eq!(to_decimal(&Rational::new(5, 2), 0), "2");
        assert_eq!(to_decimal(&Rational::new(7, 2), 0), "4");
        assert_eq!(to_decimal(&Rational::new(2468, 10000), 3), "0.247");
        assert_eq!(to_decimal(&Rational::new(2495, 10000), 3), "0.250");
        assert_eq!(to_decimal(&Rational::new(2485, 10000), 3), "0.248");
        assert_eq!(to_decimal(&Rational::new(999_9999, 10_000_000), 6), "1.000000");
    }
}
