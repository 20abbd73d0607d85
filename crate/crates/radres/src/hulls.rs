//! Hull descriptors: `perfect:<theta>,<t>`, `halfdisc:<x>,<eps>` and
//! `polyline:<file>`.
//!
//! Angles accept `pi` expressions such as `pi/2`, `3pi/4` or `2*pi/3`.

use std::path::Path;

use radres_core::sampler::TestHull;
use radres_core::C;

use crate::error::{CliError, Result};
use crate::formats::read_points_csv;

/// Parses a number or a multiple of π, optionally over a denominator.
pub fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || CliError::usage(format!("cannot read `{s}` as a number"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            match coef {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            }
        }
        None => return num.parse::<f64>().map(|v| v / den).map_err(|_| bad()),
    };
    Ok(value * std::f64::consts::PI / den)
}

fn two_numbers(kind: &str, args: &str) -> Result<(f64, f64)> {
    match args.split(',').collect::<Vec<_>>().as_slice() {
        [a, b] => Ok((parse_angle(a)?, parse_angle(b)?)),
        _ => Err(CliError::usage(format!("`{kind}` takes two comma-separated numbers, got `{args}`"))),
    }
}

/// A polyline hull is a region piece when both ends lie on the unit circle.
fn polyline_hull(path: &str) -> Result<TestHull> {
    let points = read_points_csv(Path::new(path))?;
    let on = |p: &C| (p.norm() - 1.0).abs() < 1e-9;
    let region = points.len() > 2 && on(&points[0]) && on(&points[points.len() - 1]);
    Ok(TestHull::polyline(&format!("polyline({path})"), points, region)?)
}

pub fn parse_hull(desc: &str) -> Result<TestHull> {
    let (kind, args) = desc.split_once(':').ok_or_else(|| CliError::usage(format!("hull `{desc}` needs the form kind:parameters")))?;
    match kind {
        "perfect" => {
            let (theta, t) = two_numbers(kind, args)?;
            Ok(TestHull::perfect(theta, t)?)
        }
        "halfdisc" => {
            let (x, eps) = two_numbers(kind, args)?;
            Ok(TestHull::half_disc(x, eps)?)
        }
        "polyline" => polyline_hull(args),
        _ => Err(CliError::usage(format!("unknown hull kind `{kind}` (expected perfect, halfdisc or polyline)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 0.75 * PI);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("0.2").unwrap(), 0.2);
        assert_eq!(parse_angle("1/4").unwrap(), 0.25);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("").is_err());
    }

    #[test]
    fn descriptors() {
        let h = parse_hull("perfect:pi/2,0.2").unwrap();
        assert!((h.derivatives.d0 - 0.2f64.exp()).abs() < 1e-12);
        assert!(parse_hull("halfdisc:2,0.05").is_ok());
        assert!(parse_hull("perfect:pi").is_err());
        assert!(parse_hull("square:1,2").is_err());
        assert!(parse_hull("perfect").is_err());
        assert_eq!(parse_hull("halfdisc:0.5,1").unwrap_err().exit_code(), 2);
    }
}
