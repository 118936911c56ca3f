//! Value parsers for command-line flags. Integer flags accept scientific
//! notation (`3e2`) as long as the value is integral.

pub fn count(s: &str) -> Result<usize, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("expected a nonnegative integer, got {s:?}"))
    }
}

pub fn seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    // integers above 2^53 must be written out in full
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0 {
        Ok(v as u64)
    } else {
        Err(format!("expected a nonnegative integer seed, got {s:?}"))
    }
}

/// `ROWSxCOLS`, or a single number for a square scene.
pub fn size(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = match s.split_once(['x', 'X']) {
        Some((r, c)) => (count(r)?, count(c)?),
        None => {
            let n = count(s)?;
            (n, n)
        }
    };
    if r == 0 || c == 0 {
        return Err(format!("scene size must be positive, got {s:?}"));
    }
    Ok((r, c))
}

/// Comma-separated finite, distinct SNR values in dB.
pub fn snr_list(s: &str) -> Result<Vec<f64>, String> {
    let mut out: Vec<f64> = Vec::new();
    for part in s.split(',') {
        let v: f64 = part.trim().parse().map_err(|_| format!("invalid SNR {part:?}"))?;
        if !v.is_finite() {
            return Err(format!("SNR must be finite, got {part:?}"));
        }
        if out.contains(&v) {
            return Err(format!("SNR {v} listed twice"));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("invalid value in {s:?}"))?;
    Ok((k.trim().to_string(), v))
}

/// Band indices as a comma-separated list of indices and `a-b` ranges.
pub fn index_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (count(a)?, count(b)?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(count(part)?),
        }
    }
    Ok(out)
}

/// Comma-separated denoiser kinds.
pub fn name_list(s: &str) -> Result<Vec<String>, String> {
    let names: Vec<String> = s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
    if names.is_empty() {
        return Err("empty list".into());
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(count("300"), Ok(300));
        assert_eq!(count("3e2"), Ok(300));
        assert_eq!(count("1E3"), Ok(1000));
        assert!(count("2.5").is_err());
        assert!(count("-1").is_err());
        assert_eq!(seed("1e6"), Ok(1_000_000));
        assert_eq!(seed("18446744073709551615"), Ok(u64::MAX));
    }

    #[test]
    fn sizes_and_lists() {
        assert_eq!(size("64x32"), Ok((64, 32)));
        assert_eq!(size("6.4e1"), Ok((64, 64)));
        assert!(size("0x4").is_err());
        assert_eq!(snr_list("5,10, 2e1,30"), Ok(vec![5.0, 10.0, 20.0, 30.0]));
        assert!(snr_list("5,inf").is_err());
        assert!(snr_list("5,5").is_err());
        assert!(snr_list("").is_err());
        assert_eq!(key_value("h_factor=5e-2"), Ok(("h_factor".into(), 0.05)));
        assert_eq!(index_list("0,3-5"), Ok(vec![0, 3, 4, 5]));
    }
}
