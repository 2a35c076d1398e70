use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = dir.join(tmp_name);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// `data/b.csv` -> `data/b.standardization.json`
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.standardization.json"))
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("bad list element `{v}`: {e}")))
        .collect()
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad range `{s}`")))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { bail!("range must be start:stop:step, got `{s}`") };
    if !(step > 0.0) || stop < start {
        bail!("range `{s}` must have step > 0 and stop >= start");
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    // Round to the step's precision so 0.1 steps print as 0.3, not 0.30000000000000004.
    let digits = (-step.log10()).ceil().max(0.0) as i32 + 6;
    let scale = 10f64.powi(digits);
    Ok((0..=count).map(|i| ((start + i as f64 * step) * scale).round() / scale).collect())
}
