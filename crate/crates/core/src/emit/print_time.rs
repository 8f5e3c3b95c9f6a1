//! Print-time estimate from G-code: path length over feedrate plus heat-up.

use thiserror::Error;

pub const DEFAULT_HEATUP_MIN: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("G-code line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Minutes to run `gcode`, plus the default heat-up constant.
pub fn estimate_print_time(gcode: &str) -> Result<f64, ParseError> {
    estimate_print_time_with(gcode, DEFAULT_HEATUP_MIN)
}

/// Sums `length / F` over every `G0`/`G1` move. Lengths are Euclidean in XYZ;
/// `F` is modal and must be set before the first move. `G28` homes the
/// listed axes (all when none are listed) to 0. Positioning is absolute.
pub fn estimate_print_time_with(gcode: &str, heatup_min: f64) -> Result<f64, ParseError> {
    let mut pos = [0.0f64; 3];
    let mut feed: Option<f64> = None;
    let mut minutes = 0.0;
    for (i, raw) in gcode.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ParseError { line, message };
        let code = raw.split(';').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let mut words = code.split_whitespace();
        let cmd = words.next().expect("non-empty line");
        let mut args: Vec<(char, f64)> = Vec::new();
        for w in words {
            let mut chars = w.chars();
            let letter = chars
                .next()
                .filter(|c| c.is_ascii_alphabetic())
                .ok_or_else(|| err(format!("malformed word `{w}`")))?
                .to_ascii_uppercase();
            let value: f64 = chars
                .as_str()
                .parse()
                .map_err(|_| err(format!("malformed number in `{w}`")))?;
            if !value.is_finite() {
                return Err(err(format!("non-finite value in `{w}`")));
            }
            args.push((letter, value));
        }
        match cmd.to_ascii_uppercase().as_str() {
            "G0" | "G1" => {
                let mut next = pos;
                for &(l, v) in &args {
                    match l {
                        'X' => next[0] = v,
                        'Y' => next[1] = v,
                        'Z' => next[2] = v,
                        'F' if v > 0.0 => feed = Some(v),
                        'F' => return Err(err(format!("feedrate must be > 0, got {v}"))),
                        'E' => {}
                        other => return Err(err(format!("unexpected axis `{other}` in move"))),
                    }
                }
                let f = feed.ok_or_else(|| err("move before any feedrate".into()))?;
                let d = ((next[0] - pos[0]).powi(2)
                    + (next[1] - pos[1]).powi(2)
                    + (next[2] - pos[2]).powi(2))
                .sqrt();
                minutes += d / f;
                pos = next;
            }
            "G28" => {
                if args.is_empty() {
                    pos = [0.0; 3];
                }
                for &(l, _) in &args {
                    match l {
                        'X' => pos[0] = 0.0,
                        'Y' => pos[1] = 0.0,
                        'Z' => pos[2] = 0.0,
                        other => return Err(err(format!("unexpected axis `{other}` in G28"))),
                    }
                }
            }
            "G90" | "G92" | "M82" | "M104" | "M109" | "M140" | "M190" => {}
            other => return Err(err(format!("unsupported command `{other}`"))),
        }
    }
    Ok(minutes + heatup_min)
}
