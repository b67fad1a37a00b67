//! Number formatting shared by the writers.

/// Format a real the way the canonical `.auto` grammar stores it
/// (`%.10E`: ten mantissa decimals, signed exponent with at least two digits).
pub fn canonical_real(x: f64) -> String {
    let s = format!("{:.10e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mant = if mant == "-0.0000000000" { "0.0000000000" } else { mant };
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{}E{}{:02}", mant, sign, exp.abs())
}

/// Six significant digits, trailing zeros trimmed. Used for SVG coordinates.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return "0".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.5e}", x);
    let (_, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let rounded: f64 = sci.parse().expect("round trip");
    let out = if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, rounded))
    } else {
        let (m, e) = sci.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(m.to_string()), e)
    };
    if out == "-0" {
        "0".to_string()
    } else {
        out
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
