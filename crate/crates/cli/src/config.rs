//! `key = value` configuration files, spliced into the argument list ahead of
//! the command-line flags so that the flags win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::Failure;

/// Reads a configuration file into `--key value` tokens. Blank lines and lines
/// starting with `#` are skipped; `key = true` becomes a bare `--key` switch.
pub fn config_tokens(path: &Path) -> Result<Vec<OsString>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("{}:{}: expected key = value", path.display(), no + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key == "config" {
            return Err(Failure::config(format!("{}:{}: invalid key '{key}'", path.display(), no + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.trim_matches('"').into());
            }
        }
    }
    Ok(out)
}

/// Inserts the tokens of any `--config PATH` right after the subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let pos = args.iter().position(|a| a == "--config");
    let path = match pos {
        Some(i) => args
            .get(i + 1)
            .ok_or_else(|| Failure::config("--config needs a path"))?
            .clone(),
        None => {
            if let Some(a) = args.iter().find_map(|a| a.to_str().and_then(|s| s.strip_prefix("--config="))) {
                a.into()
            } else {
                return Ok(args);
            }
        }
    };
    let tokens = config_tokens(Path::new(&path))?;
    let split = 2.min(args.len());
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(tokens);
    out.extend(args[split..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_from_file() {
        let dir = std::env::temp_dir().join(format!("vne-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.conf");
        fs::write(&p, "# comment\nmethod = hutchpp\n\neps = 1e-2\nvia-power = true\n").unwrap();
        let t = config_tokens(&p).unwrap();
        assert_eq!(t, ["--method", "hutchpp", "--eps", "1e-2", "--via-power"].map(OsString::from));
        fs::write(&p, "broken line\n").unwrap();
        assert!(config_tokens(&p).is_err());
    }

    #[test]
    fn flags_follow_config() {
        let dir = std::env::temp_dir().join(format!("vne-config-b-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.conf");
        fs::write(&p, "eps = 0.5\n").unwrap();
        let args: Vec<OsString> = ["vne", "entropy", "--config", p.to_str().unwrap(), "--eps", "0.1"]
            .iter()
            .map(OsString::from)
            .collect();
        let out = expand(args).unwrap();
        let s: Vec<_> = out.iter().map(|a| a.to_str().unwrap()).collect();
        assert_eq!(&s[..4], ["vne", "entropy", "--eps", "0.5"]);
        assert_eq!(&s[s.len() - 2..], ["--eps", "0.1"]);
    }
}
