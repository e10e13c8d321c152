//! Run configuration: flag values in one serializable struct.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Heat,
    General,
}

/// Everything a `run` needs; round-trips losslessly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub dim: usize,
    pub mode: Mode,
    pub depth: u32,
    pub samples: u32,
    pub order: u32,
    pub rho: f64,
    pub time: f64,
    pub x_spec: String,
    pub reps: u32,
    pub seed: u64,
    pub deterministic: bool,
}

/// Expand an x specification into a point: `zero`, `radial:r` (placing
/// the point at distance `r` from the origin along the diagonal), or an
/// explicit comma-separated list of coordinates.
pub fn parse_x_spec(spec: &str, dim: usize) -> Result<Vec<f64>, String> {
    if spec == "zero" {
        return Ok(vec![0.0; dim]);
    }
    if let Some(radius) = spec.strip_prefix("radial:") {
        let r: f64 = radius
            .parse()
            .map_err(|_| format!("bad radius in x spec {spec:?}"))?;
        let component = r / (dim as f64).sqrt();
        return Ok(vec![component; dim]);
    }
    let values: Result<Vec<f64>, _> = spec.split(',').map(str::parse).collect();
    let values = values.map_err(|_| format!("bad coordinate list {spec:?}"))?;
    if values.len() != dim {
        return Err(format!(
            "x spec has {} coordinates, problem dimension is {dim}",
            values.len()
        ));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let config = RunConfig {
            problem: "manufactured".into(),
            dim: 5,
            mode: Mode::Heat,
            depth: 3,
            samples: 3,
            order: 3,
            rho: 2.0,
            time: 0.25,
            x_spec: "radial:1.5".into(),
            reps: 100,
            seed: 42,
            deterministic: true,
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn x_specs_expand() {
        assert_eq!(parse_x_spec("zero", 3).unwrap(), vec![0.0; 3]);
        let radial = parse_x_spec("radial:2.0", 4).unwrap();
        let norm: f64 = radial.iter().map(|v| v * v).sum::<f64>();
        assert!((norm.sqrt() - 2.0).abs() < 1e-12);
        assert_eq!(
            parse_x_spec("0.5,-1.5", 2).unwrap(),
            vec![0.5, -1.5]
        );
        assert!(parse_x_spec("1,2,3", 2).is_err());
        assert!(parse_x_spec("abc", 2).is_err());
    }
}
