//! `%.Ng`-style number formatting used by every CSV this crate writes.

/// Formats `x` with `digits` significant digits, switching to exponent
/// notation for very large or very small magnitudes. Trailing zeros are
/// dropped, so `0.3` prints as `0.3` rather than `0.3000000000`.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}").to_lowercase();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_owned()
}

/// Ten significant digits, the precision of all numeric report columns.
pub fn sig10(x: f64) -> String {
    sig(x, 10)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
