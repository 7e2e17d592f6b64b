use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use gwf::{io, Error, Result};
use serde::{Deserialize, Serialize};

use crate::run::RunSpec;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub spec: RunSpec,
    pub seeds: Vec<u64>,
    pub threads: Option<usize>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<String>,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        io::write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if m.schema_version != MANIFEST_SCHEMA {
            return Err(Error::Config(format!(
                "{}: manifest schema {} is not supported (expected {MANIFEST_SCHEMA})",
                path.display(),
                m.schema_version
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gwf::radar::{PhantomSpec, RadarConfig, RectTarget};

    #[test]
    fn floats_survive_a_write_read_cycle() {
        let dir = tempfile::tempdir().unwrap();
        let mut phantom = PhantomSpec::default();
        for k in 0..200u64 {
            let amplitude = 0.5 + (k as f64 * 0.6180339887498949).fract() / 2.0 + 1e-17 * k as f64;
            phantom.rects.push(RectTarget { ix: 0, iy: 0, width: 1, height: 1, amplitude });
        }
        phantom.rects.push(RectTarget { ix: 0, iy: 0, width: 1, height: 1, amplitude: 0.9249169488391197 });
        let spec = RunSpec::Radar {
            config: RadarConfig::small(),
            phantom,
            record_every: 10,
            compare: false,
        };
        let m = RunManifest {
            schema_version: MANIFEST_SCHEMA,
            command: spec.name().into(),
            tool_version: "0".into(),
            seeds: spec.seeds(),
            spec,
            threads: Some(2),
            started_unix_ms: 1,
            finished_unix_ms: 2,
            outputs: vec![],
        };
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap(), m);
    }
}
