use std::path::{Path, PathBuf};

use fba_core::io::{self, fbaf::FbafContainer};
use fba_core::{ColorMap, PixelMap, PredictionSet};

use crate::error::{CliError, CliResult};

const ALPHA_EXTS: [&str; 3] = ["pfm", "fbaf", "png"];
const COLOR_EXTS: [&str; 3] = ["fbaf", "pfm", "png"];

/// Fails unless `path` is absent or `force` is set.
pub fn guard(path: &Path, force: bool) -> CliResult<()> {
    if !force && path.exists() {
        return Err(CliError::io(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(())
}

pub fn guard_all<'a>(paths: impl IntoIterator<Item = &'a Path>, force: bool) -> CliResult<()> {
    paths.into_iter().try_for_each(|p| guard(p, force))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("{}: cannot create directory: {e}", dir.display())))
}

fn find(dir: &Path, stem: &str, exts: &[&str]) -> CliResult<PathBuf> {
    exts.iter()
        .map(|e| dir.join(format!("{stem}.{e}")))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            CliError::io(format!(
                "{}: no {stem}.{{{}}} found",
                dir.display(),
                exts.join(",")
            ))
        })
}

/// Paths of `alpha`, `fg` and `bg` inside a prediction directory.
pub fn prediction_paths(dir: &Path) -> CliResult<[PathBuf; 3]> {
    Ok([
        find(dir, "alpha", &ALPHA_EXTS)?,
        find(dir, "fg", &COLOR_EXTS)?,
        find(dir, "bg", &COLOR_EXTS)?,
    ])
}

pub fn read_prediction(dir: &Path) -> CliResult<PredictionSet> {
    let [a, f, b] = prediction_paths(dir)?;
    Ok(PredictionSet::new(
        io::read_pixel_map(a)?,
        io::read_color_map(f)?,
        io::read_color_map(b)?,
    )?)
}

pub fn write_prediction(p: &PredictionSet, dir: &Path, force: bool) -> CliResult<()> {
    let paths = [dir.join("alpha.pfm"), dir.join("fg.fbaf"), dir.join("bg.fbaf")];
    guard_all(paths.iter().map(PathBuf::as_path), force)?;
    io::write_pixel_map(&p.alpha, &paths[0])?;
    io::write_color_map(&p.fg, &paths[1])?;
    io::write_color_map(&p.bg, &paths[2])?;
    Ok(())
}

pub fn read_pixel(path: &Path) -> CliResult<PixelMap> {
    Ok(io::read_pixel_map(path)?)
}

pub fn read_color(path: &Path) -> CliResult<ColorMap> {
    Ok(io::read_color_map(path)?)
}

pub fn write_planes(planes: &[&PixelMap], path: &Path) -> CliResult<()> {
    Ok(io::fbaf::write(&FbafContainer::from_planes(planes), path)?)
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}
