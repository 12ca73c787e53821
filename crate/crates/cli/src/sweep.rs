use std::fmt;

use cfmimo::channel::OfdmGrid;
use cfmimo::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    BandwidthHz,
    NumAntennas,
    NumAps,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            Self::BandwidthHz => "bandwidth_hz",
            Self::NumAntennas => "num_antennas",
            Self::NumAps => "num_aps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Value of one sweep point, formatted for directory names.
pub struct PointLabel<'a>(pub &'a Sweep, pub usize);

impl fmt::Display for PointLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.0.param.name(), self.0.values[self.1])
    }
}

pub fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let (name, list) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <param>=<v1,v2,...>, got `{s}`"))?;
    let param = match name.trim() {
        "bandwidth_hz" => SweepParam::BandwidthHz,
        "num_antennas" => SweepParam::NumAntennas,
        "num_aps" => SweepParam::NumAps,
        other => {
            return Err(format!(
                "unknown sweep parameter `{other}` (expected bandwidth_hz, num_antennas or num_aps)"
            ))
        }
    };
    let values = list
        .split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .map_err(|_| format!("sweep value `{v}` is not a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(format!("sweep value {v} must be positive"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("sweep values must be strictly increasing".into());
    }
    if param != SweepParam::BandwidthHz {
        if let Some(v) = values.iter().find(|v| v.fract() != 0.0) {
            return Err(format!("{} value {v} must be an integer", param.name()));
        }
    }
    Ok(Sweep { param, values })
}

/// Applies one sweep value to the scenario and grid.
pub fn apply(
    param: SweepParam,
    value: f64,
    scenario: &Scenario,
    grid: &OfdmGrid,
) -> cfmimo::Result<(Scenario, OfdmGrid)> {
    match param {
        SweepParam::BandwidthHz => Ok((scenario.clone(), grid.with_bandwidth(value)?)),
        SweepParam::NumAntennas => Ok((scenario.with_num_antennas(value as usize)?, grid.clone())),
        SweepParam::NumAps => Ok((scenario.with_first_aps(value as usize)?, grid.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_sweeps() {
        let s = parse_sweep("bandwidth_hz=1e8, 2e8,4e8").unwrap();
        assert_eq!(s.param, SweepParam::BandwidthHz);
        assert_eq!(s.values, vec![1e8, 2e8, 4e8]);
        assert_eq!(PointLabel(&s, 2).to_string(), "bandwidth_hz_400000000");
        assert_eq!(parse_sweep("num_aps=1,2").unwrap().values, vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_sweeps() {
        for bad in [
            "bandwidth_hz",
            "carrier=1,2",
            "num_aps=2,1",
            "num_aps=1,1",
            "num_antennas=0,4",
            "num_antennas=1.5",
            "bandwidth_hz=-1",
            "bandwidth_hz=x",
        ] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }
}
