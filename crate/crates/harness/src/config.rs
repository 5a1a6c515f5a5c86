//! Loading configurations from TOML files.

use std::fs;
use std::path::Path;

use mg_core::GameConfig;
use serde::de::DeserializeOwned;

use crate::error::HarnessError;

pub(crate) fn parse_toml<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, HarnessError> {
    toml::from_str(text).map_err(|e| HarnessError::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Parses and validates a game configuration. Keys are the `GameConfig` field
/// names; anything else is rejected.
pub fn parse_config(path: &Path, text: &str) -> Result<GameConfig, HarnessError> {
    let config: GameConfig = parse_toml(path, text)?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<GameConfig, HarnessError> {
    parse_config(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mg_core::{PayoffKind, PrefDist};

    fn parse(text: &str) -> Result<GameConfig, HarnessError> {
        parse_config(Path::new("test.toml"), text)
    }

    #[test]
    fn minimal_config() {
        let c = parse("n_agents = 255\nm = 1\nrho = 0.1\n").unwrap();
        assert_eq!(c.n_agents, 255);
        assert_eq!(c.signal_dim(), 2);
        assert_eq!(c.s, 2);
        assert_eq!(c.payoff_kind, PayoffKind::Linear);
        assert_eq!(c.pref_dist, PrefDist::Gaussian);
    }

    #[test]
    fn full_config() {
        let c = parse(
            r#"
n_agents = 101
s = 3
m = 2
signal_mode = "exogenous"
update_mode = "batch"
payoff_kind = "quadratic"
pref_dist = "bimodal"
rho = 0.25
t_equil = 10
t_measure = 50
seed = 9
"#,
        )
        .unwrap();
        assert_eq!(c.s, 3);
        assert_eq!(c.t_equil, Some(10));
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn unknown_key_is_error() {
        let e = parse("n_agents = 255\nm = 1\nrho = 0.1\nnoise = 3\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("noise"), "{e}");
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert_eq!(parse("n_agents = 254\nm = 1\n").unwrap_err().exit_code(), 2);
        assert_eq!(
            parse("n_agents = 255\nm = 1\npayoff_kind = \"cubic\"\n")
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(parse("n_agents = 255\n").unwrap_err().exit_code(), 2);
    }
}
