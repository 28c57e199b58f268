use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use pcq_core::bitstream::SyntaxDescriptorProfile;
use pcq_core::ModelParams;

use crate::failure::{fail, Classify, CmdResult, Kind};

pub fn read_bytes(path: &Path) -> CmdResult<Vec<u8>> {
    std::fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .kind(Kind::Input)
}

pub fn read_text(path: &Path) -> CmdResult<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .kind(Kind::Input)
}

pub fn open(path: &Path) -> CmdResult<std::fs::File> {
    std::fs::File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .kind(Kind::Input)
}

/// Writes `contents` to `out` through a temporary file in the same
/// directory, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, contents: &[u8]) -> CmdResult {
    let Some(path) = out else {
        return std::io::stdout()
            .write_all(contents)
            .context("writing to stdout")
            .kind(Kind::Input);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let write = || -> anyhow::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path)?;
        Ok(())
    };
    write()
        .with_context(|| format!("cannot write {}", path.display()))
        .kind(Kind::Input)
}

/// Where the parameters came from, for output provenance.
pub struct LoadedParams {
    pub params: ModelParams,
    pub source: String,
}

pub fn load_params(path: Option<&Path>) -> CmdResult<LoadedParams> {
    match path {
        None => Ok(LoadedParams {
            params: ModelParams::published(),
            source: "builtin:published".into(),
        }),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read parameter file {}", p.display()))
                .kind(Kind::Config)?;
            let params = ModelParams::from_json(&text)
                .with_context(|| format!("invalid parameter file {}", p.display()))
                .kind(Kind::Config)?;
            Ok(LoadedParams {
                params,
                source: p.display().to_string(),
            })
        }
    }
}

/// A builtin profile name or a path to a profile JSON document.
pub fn load_profile(spec: &str) -> CmdResult<SyntaxDescriptorProfile> {
    if let Some(p) = SyntaxDescriptorProfile::builtin(spec) {
        return Ok(p);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return fail(
            Kind::Config,
            format!(
                "unknown profile `{spec}` (builtin: {})",
                SyntaxDescriptorProfile::builtin_names().join(", ")
            ),
        );
    }
    let text = read_text(path)?;
    SyntaxDescriptorProfile::from_json(&text)
        .with_context(|| format!("invalid profile {}", path.display()))
        .kind(Kind::Config)
}

/// `# key=value` lines placed ahead of CSV output.
pub fn csv_preamble(entries: &[(&str, String)]) -> String {
    entries
        .iter()
        .map(|(k, v)| format!("# {k}={v}\n"))
        .collect()
}
