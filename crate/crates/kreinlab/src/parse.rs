//! Small text parsers shared by the library and the command line.

use num_complex::Complex64;

/// Parse `2`, `-1.5`, `i`, `-2i`, `1+1i`, `0.5-0.5i` (`j` accepted for `i`).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let bad = || format!("cannot parse complex number '{text}'");
    let finite = |v: f64| if v.is_finite() { Ok(v) } else { Err(bad()) };
    if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_txt, im_txt) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_txt.is_empty() {
            0.0
        } else {
            finite(re_txt.parse::<f64>().map_err(|_| bad())?)?
        };
        let im = match im_txt {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => finite(t.parse::<f64>().map_err(|_| bad())?)?,
        };
        Ok(Complex64::new(re, im))
    } else {
        let re = finite(s.parse::<f64>().map_err(|_| bad())?)?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// Parse a strictly finite real number.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse number '{text}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("number '{text}' is not finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let cases = [
            ("2", (2.0, 0.0)),
            ("-1.5", (-1.5, 0.0)),
            ("i", (0.0, 1.0)),
            ("-i", (0.0, -1.0)),
            ("2i", (0.0, 2.0)),
            ("1+1i", (1.0, 1.0)),
            ("1+i", (1.0, 1.0)),
            ("0.5-0.5i", (0.5, -0.5)),
            ("-1-i", (-1.0, -1.0)),
            ("1e-3+2e-3j", (1e-3, 2e-3)),
        ];
        for (txt, (re, im)) in cases {
            assert_eq!(parse_complex(txt).unwrap(), Complex64::new(re, im), "{txt}");
        }
        for bad in ["", "x", "1+", "nan", "inf", "1+nani"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }
}
