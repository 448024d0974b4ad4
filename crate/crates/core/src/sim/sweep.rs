use super::{metrics, run, Metrics, ScenarioConfig, SimError};

/// Returns a copy of `base` with the dotted key `param` (e.g.
/// `controller.gains.k3`) set to `value`.
pub fn with_param(base: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig, SimError> {
    let bad = |message: String| SimError::Sweep {
        param: param.to_string(),
        message,
    };
    let mut doc: toml::Value = toml::Value::try_from(base).map_err(|e| bad(e.to_string()))?;
    let mut keys = param.split('.').peekable();
    let mut node = &mut doc;
    while let Some(key) = keys.next() {
        let table = node.as_table_mut().ok_or_else(|| bad(format!("`{key}` is not inside a table")))?;
        if keys.peek().is_none() {
            let slot = table.get_mut(key).ok_or_else(|| bad(format!("unknown key `{key}`")))?;
            *slot = match slot {
                toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
                toml::Value::Float(_) => toml::Value::Float(value),
                other => return Err(bad(format!("`{key}` holds {}, not a number", other.type_str()))),
            };
            break;
        }
        node = table.get_mut(key).ok_or_else(|| bad(format!("unknown key `{key}`")))?;
    }
    let cfg: ScenarioConfig = doc.try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one scenario per value on separate threads. Results keep the order
/// of `values`.
pub fn sweep(base: &ScenarioConfig, param: &str, values: &[f64]) -> Vec<(f64, Result<Metrics, SimError>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .map(|&v| {
                scope.spawn(move || {
                    let result = with_param(base, param, v).and_then(|cfg| metrics(&run(&cfg)?));
                    (v, result)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_nested_values() {
        let base = ScenarioConfig::paper_sim1();
        let cfg = with_param(&base, "controller.gains.k3", 6.0).unwrap();
        assert_eq!(cfg.controller.gains.k3, 6.0);
        let cfg = with_param(&base, "vehicle.mass", 2.0).unwrap();
        assert_eq!(cfg.vehicle.mass, 2.0);
        let cfg = with_param(&base, "control_decimation", 2.0).unwrap();
        assert_eq!(cfg.control_decimation, 2);
    }

    #[test]
    fn rejects_bad_paths_and_values() {
        let base = ScenarioConfig::paper_sim1();
        assert!(with_param(&base, "controller.gains.k9", 1.0).is_err());
        assert!(with_param(&base, "controller.primary", 1.0).is_err());
        assert!(matches!(with_param(&base, "dt", 0.5), Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn parallel_results_keep_order() {
        let mut base = ScenarioConfig::paper_sim1();
        base.duration = 0.2;
        let out = sweep(&base, "controller.gains.k1", &[0.8, 1.2, -1.0]);
        assert_eq!(out.iter().map(|(v, _)| *v).collect::<Vec<_>>(), vec![0.8, 1.2, -1.0]);
        assert!(out[0].1.is_ok() && out[1].1.is_ok());
        assert!(out[2].1.is_err());
    }
}
