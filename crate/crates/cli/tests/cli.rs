use std::path::Path;
use std::process::{Command, Output};

use fba_core::io;
use fba_core::{ColorMap, PixelMap};

fn fba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fba"))
        .args(args)
        .env_remove("FBA_THREADS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn layers(dir: &Path) -> [String; 3] {
    let alpha = PixelMap::from_fn(6, 5, |x, _| x as f32 / 5.0);
    let fg = ColorMap::filled(6, 5, [0.9, 0.1, 0.2]);
    let bg = ColorMap::filled(6, 5, [0.1, 0.3, 0.8]);
    let paths = ["alpha.pfm", "fg.fbaf", "bg.fbaf"].map(|n| dir.join(n));
    io::write_pixel_map(&alpha, &paths[0]).unwrap();
    io::write_color_map(&fg, &paths[1]).unwrap();
    io::write_color_map(&bg, &paths[2]).unwrap();
    paths.map(|p| p.to_string_lossy().into_owned())
}

#[test]
fn missing_arguments_exit_with_usage_code() {
    let o = fba(&["composite", "--alpha", "a.pfm"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error kind=usage code=1 message=\""), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn zero_threads_is_a_usage_error() {
    let o = fba(&["--threads", "0", "evaluate", "--pred", "a", "--gt", "b", "--trimap", "c"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.pfm");
    let o = fba(&["composite", "--alpha", "nope.pfm", "--fg", "nope.fbaf", "--bg", "nope.fbaf",
                  "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error kind=io code=2"));
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let [a, f, b] = layers(dir.path());
    let out = dir.path().join("c.pfm");
    let out_s = out.to_str().unwrap();
    let args = ["composite", "--alpha", &a, "--fg", &f, "--bg", &b, "-o", out_s];
    assert!(fba(&args).status.success());
    std::fs::write(&out, b"keep").unwrap();
    let o = fba(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--force"));
    assert_eq!(std::fs::read(&out).unwrap(), b"keep");
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(fba(&forced).status.success());
    assert_ne!(std::fs::read(&out).unwrap(), b"keep");
}

#[test]
fn opaque_composite_reproduces_foreground_png() {
    let dir = tempfile::tempdir().unwrap();
    let [_, f, b] = layers(dir.path());
    let ones = dir.path().join("ones.pfm");
    io::write_pixel_map(&PixelMap::filled(6, 5, 1.0), &ones).unwrap();
    let out = dir.path().join("c.png");
    let ref_png = dir.path().join("fg.png");
    io::png::write_color(&io::read_color_map(&f).unwrap(), &ref_png, io::png::BitDepth::Eight).unwrap();
    let o = fba(&["composite", "--alpha", ones.to_str().unwrap(), "--fg", &f, "--bg", &b,
                  "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(out).unwrap(), std::fs::read(ref_png).unwrap());
}

#[test]
fn unparseable_transform_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fba(&["tta-merge", "--inputs", dir.path().to_str().unwrap(), "--transforms", "rot45",
                  "-o", dir.path().join("m").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn text_report_lists_raw_and_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let [a, _, _] = layers(dir.path());
    let tri = dir.path().join("t.png");
    let t = fba_core::Trimap::filled(6, 5, fba_core::Label::Unknown);
    fba_core::trimap::trimap_to_file(&t, &tri).unwrap();
    let o = fba(&["evaluate", "--pred", &a, "--gt", &a, "--trimap", tri.to_str().unwrap(),
                  "--metrics", "sad,mse"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "sad 0.0 table 0.0\nmse 0.0 table 0.0\n");
}
