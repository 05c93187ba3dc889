use num_complex::Complex64;
use ququart::qmath::StateVector;
use ququart::rng::rng_from_seed;

/// Amplitude norms further than this from 1 are reported before normalizing.
pub const NORM_WARNING_TOL: f64 = 1e-6;

/// Parsed `--state` value, normalized, plus a warning if it was not
/// normalized to begin with.
pub struct ParsedState {
    pub state: StateVector,
    pub warning: Option<String>,
}

/// `uniform`, `basis0`..`basis3`, `random:<seed>`, or eight comma-separated
/// numbers read as `re,im` pairs in natural-basis order.
pub fn parse_state(text: &str) -> Result<ParsedState, String> {
    let t = text.trim();
    let raw = if t == "uniform" {
        StateVector::from_real(vec![4], &[0.5; 4]).map_err(|e| e.to_string())?
    } else if let Some(k) = t.strip_prefix("basis") {
        let k: usize = k.parse().map_err(|_| format!("bad preset '{t}'"))?;
        if k > 3 {
            return Err(format!("preset '{t}': level must be 0..3"));
        }
        StateVector::basis(vec![4], k).map_err(|e| e.to_string())?
    } else if let Some(seed) = t.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| format!("bad seed in '{t}'"))?;
        StateVector::random(vec![4], &mut rng_from_seed(seed)).map_err(|e| e.to_string())?
    } else {
        let nums: Vec<f64> = t
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number")))
            .collect::<Result<_, _>>()?;
        if nums.len() != 8 {
            return Err(format!("expected 8 numbers (4 re,im pairs), got {}", nums.len()));
        }
        let amps = nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        StateVector::new(vec![4], amps).map_err(|e| e.to_string())?
    };
    let norm = raw.norm();
    let state = raw.normalized().map_err(|e| e.to_string())?;
    let warning = ((norm - 1.0).abs() > NORM_WARNING_TOL)
        .then(|| format!("input norm {norm} deviates from 1 by more than {NORM_WARNING_TOL:e}; normalized"));
    Ok(ParsedState { state, warning })
}
