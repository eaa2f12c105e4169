//! Budget lists given in dB, either `a,b,c` or an inclusive `start:stop:count` range.

use crate::error::{bad, CliError};

pub fn parse_budget_db(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(bad("the budget list is empty"));
    }
    let number = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s.trim().parse().map_err(|_| {
            bad(format!(
                "cannot read budget `{}` as a number of dB",
                s.trim()
            ))
        })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("budget `{}` is not finite", s.trim())))
        }
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!(
                "a budget range reads start:stop:count, got `{text}`"
            )));
        }
        let (start, stop) = (number(parts[0])?, number(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("range count `{}` is not a whole number", parts[2])))?;
        return match count {
            0 => Err(bad("a budget range needs at least one point")),
            1 => Ok(vec![start]),
            n => {
                let span = stop - start;
                Ok((0..n)
                    .map(|i| start + span * i as f64 / (n - 1) as f64)
                    .collect())
            }
        };
    }
    text.split(',').map(number).collect()
}
