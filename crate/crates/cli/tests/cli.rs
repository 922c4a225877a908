use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use glyphocr::features::{feature_vector, FeatureConfig};
use glyphocr::raster::{load_pnm, save_pbm, BinaryRaster, Threshold};
use glyphocr::Glyph;

fn glyphocr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glyphocr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_pbm(path: &Path, r: &BinaryRaster) {
    fs::write(path, save_pbm(r)).unwrap();
}

fn read_pbm(path: &Path) -> BinaryRaster {
    load_pnm(&fs::read(path).unwrap()).unwrap().into_binary(Threshold::Otsu, false)
}

/// Filled square with a square hole.
fn ring(size: usize) -> BinaryRaster {
    let mut r = BinaryRaster::blank(size, size).unwrap();
    for y in 0..size {
        for x in 0..size {
            let edge = x < 3 || y < 3 || x >= size - 3 || y >= size - 3;
            r.set(x, y, edge);
        }
    }
    r
}

fn bar(w: usize, h: usize) -> BinaryRaster {
    BinaryRaster::new(w, h, vec![1; w * h]).unwrap()
}

fn cross(size: usize) -> BinaryRaster {
    let mut r = BinaryRaster::blank(size, size).unwrap();
    for i in 0..size {
        for t in 0..3 {
            r.set(i, size / 2 - 1 + t, true);
            r.set(size / 2 - 1 + t, i, true);
        }
    }
    r
}

fn paste(page: &mut BinaryRaster, r: &BinaryRaster, ox: usize, oy: usize) {
    for (x, y) in r.foreground() {
        page.set(ox + x, oy + y, true);
    }
}

/// Writes three templates and a manifest; returns the manifest path.
fn template_dir(dir: &Path) -> std::path::PathBuf {
    write_pbm(&dir.join("o.pbm"), &ring(20));
    write_pbm(&dir.join("i.pbm"), &bar(4, 20));
    write_pbm(&dir.join("x.pbm"), &cross(20));
    let manifest = dir.join("manifest.tsv");
    fs::write(&manifest, "o.pbm\to\ni.pbm\ti\nx.pbm\tx\n").unwrap();
    manifest
}

#[test]
fn thin_empty_image_writes_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("in.pbm"), dir.path().join("out.pbm"));
    write_pbm(&input, &BinaryRaster::blank(9, 5).unwrap());
    let o = glyphocr(&["thin", s(&input), s(&output)]);
    assert!(o.status.success());
    assert_eq!(read_pbm(&output), BinaryRaster::blank(9, 5).unwrap());
}

#[test]
fn thin_respects_pass_limit() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output) = (dir.path().join("in.pbm"), dir.path().join("out.pbm"));
    let mut r = BinaryRaster::blank(24, 24).unwrap();
    paste(&mut r, &bar(16, 16), 4, 4);
    write_pbm(&input, &r);
    assert_eq!(glyphocr(&["thin", s(&input), s(&output), "--max-passes", "1"]).status.code(), Some(3));
    assert!(glyphocr(&["thin", s(&input), s(&output)]).status.success());
    assert_eq!(read_pbm(&output), glyphocr::hilditch_thin(&r));
}

#[test]
fn segment_blank_page_with_debug_dir() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("blank.pbm");
    write_pbm(&page, &BinaryRaster::blank(40, 30).unwrap());
    let debug = dir.path().join("debug");
    let o = glyphocr(&["segment", s(&page), "--debug-dir", s(&debug)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
    assert_eq!(fs::read_to_string(debug.join("lines.jsonl")).unwrap(), "");
}

#[test]
fn segment_reports_lines_and_boxes() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("page.pbm");
    let mut r = BinaryRaster::blank(60, 20).unwrap();
    paste(&mut r, &bar(3, 8), 5, 4);
    paste(&mut r, &bar(3, 8), 12, 4);
    paste(&mut r, &bar(3, 8), 19, 4);
    paste(&mut r, &bar(3, 8), 40, 4);
    write_pbm(&page, &r);
    let o = glyphocr(&["segment", s(&page)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["line"], 0);
    assert_eq!(v["band"], serde_json::json!([4, 12]));
    assert_eq!(
        v["boxes"],
        serde_json::json!([[5, 4, 8, 12, 0], [12, 4, 15, 12, 0], [19, 4, 22, 12, 0], [40, 4, 43, 12, 1]])
    );
}

#[test]
fn features_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.pbm");
    let r = cross(16);
    write_pbm(&path, &r);
    let o = glyphocr(&["features", s(&path), "--rings", "4"]);
    assert!(o.status.success());
    let got: Vec<f64> = stdout(&o).split_whitespace().map(|t| t.parse().unwrap()).collect();
    let want = feature_vector(&Glyph::from_raster(r).unwrap(), FeatureConfig { size: 16, rings: 4 }).unwrap();
    assert_eq!(got.len(), 4 + 2 * 16 + 4);
    assert_eq!(got, want.values());
}

#[test]
fn features_rejects_non_square_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.pbm");
    write_pbm(&path, &bar(4, 6));
    assert_eq!(glyphocr(&["features", s(&path)]).status.code(), Some(3));
    write_pbm(&path, &BinaryRaster::blank(8, 8).unwrap());
    assert_eq!(glyphocr(&["features", s(&path)]).status.code(), Some(3));
}

#[test]
fn train_single_entry_and_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    write_pbm(&dir.path().join("a.pbm"), &ring(12));
    let manifest = dir.path().join("m.tsv");
    let store = dir.path().join("s.store");

    fs::write(&manifest, "a.pbm\tA\n").unwrap();
    assert!(glyphocr(&["train", s(&manifest), s(&store)]).status.success());
    let st = glyphocr::TemplateStore::from_text(&fs::read_to_string(&store).unwrap()).unwrap();
    assert_eq!(st.records().len(), 1);
    assert_eq!(st.dim(), 76);

    fs::write(&manifest, "a.pbm\tA\na.pbm\tஅ\n").unwrap();
    assert!(glyphocr(&["train", s(&manifest), s(&store), "--size", "16", "--rings", "4"]).status.success());
    let st = glyphocr::TemplateStore::from_text(&fs::read_to_string(&store).unwrap()).unwrap();
    let labels: Vec<&str> = st.records().iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, ["A", "அ"]);
    assert_eq!(st.dim(), 4 + 32 + 4);
}

#[test]
fn train_failures_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.tsv");
    let store = dir.path().join("s.store");

    fs::write(&manifest, "").unwrap();
    assert_eq!(glyphocr(&["train", s(&manifest), s(&store)]).status.code(), Some(2));
    fs::write(&manifest, "missing.pbm\tA\n").unwrap();
    assert_eq!(glyphocr(&["train", s(&manifest), s(&store)]).status.code(), Some(2));

    write_pbm(&dir.path().join("blank.pbm"), &BinaryRaster::blank(5, 5).unwrap());
    fs::write(&manifest, "blank.pbm\tA\n").unwrap();
    let o = glyphocr(&["train", s(&manifest), s(&store)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blank.pbm"));
}

#[test]
fn recognize_blank_and_synthetic_pages() {
    let dir = tempfile::tempdir().unwrap();
    template_dir(dir.path());
    let store = dir.path().join("t.store");
    // A directory argument reads its manifest.tsv.
    assert!(glyphocr(&["train", s(dir.path()), s(&store)]).status.success());

    let blank = dir.path().join("blank.pbm");
    write_pbm(&blank, &BinaryRaster::blank(50, 50).unwrap());
    let o = glyphocr(&["recognize", s(&blank), s(&store)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");

    let compose = |dx: usize, dy: usize| {
        let mut page = BinaryRaster::blank(200, 80).unwrap();
        paste(&mut page, &ring(20), 5 + dx, 5 + dy);
        paste(&mut page, &bar(4, 20), 30 + dx, 5 + dy);
        paste(&mut page, &cross(20), 39 + dx, 5 + dy);
        paste(&mut page, &bar(4, 20), 120 + dx, 5 + dy);
        paste(&mut page, &ring(20), 10 + dx, 45 + dy);
        page
    };
    let page = dir.path().join("page.pbm");
    write_pbm(&page, &compose(0, 0));
    let debug = dir.path().join("debug");
    let o = glyphocr(&["recognize", s(&page), s(&store), "--debug-dir", s(&debug)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "oix i\no\n");
    for name in ["line0_word0_char0", "line0_word0_char2", "line0_word1_char0", "line1_word0_char0"] {
        assert_eq!(read_pbm(&debug.join(format!("{name}.pbm"))).width(), 32);
    }
    assert_eq!(fs::read_to_string(debug.join("lines.jsonl")).unwrap().lines().count(), 2);

    let o = glyphocr(&["recognize", s(&page), s(&store), "--separator", "|"]);
    assert_eq!(stdout(&o), "o|i|x i\no\n");

    let shifted = dir.path().join("shifted.pbm");
    write_pbm(&shifted, &compose(5, 5));
    assert_eq!(stdout(&glyphocr(&["recognize", s(&shifted), s(&store)])), "oix i\no\n");
}

#[test]
fn recognize_store_mismatch_and_bad_store() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = template_dir(dir.path());
    let store = dir.path().join("t.store");
    assert!(glyphocr(&["train", s(&manifest), s(&store)]).status.success());
    let page = dir.path().join("page.pbm");
    write_pbm(&page, &ring(20));
    assert_eq!(glyphocr(&["recognize", s(&page), s(&store), "--size", "24"]).status.code(), Some(3));

    fs::write(&store, "GLYPHSTORE v9\n").unwrap();
    assert_eq!(glyphocr(&["recognize", s(&page), s(&store)]).status.code(), Some(2));
}

#[test]
fn exit_codes_for_usage_input_and_output() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(glyphocr(&[]).status.code(), Some(1));
    assert_eq!(glyphocr(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(glyphocr(&["--help"]).status.code(), Some(0));
    assert_eq!(glyphocr(&["--threshold", "300", "binarize", "a", "b"]).status.code(), Some(1));

    let bad = dir.path().join("bad.pbm");
    fs::write(&bad, b"P7\n1 1\n").unwrap();
    let o = glyphocr(&["binarize", s(&bad), s(&dir.path().join("o.pbm"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(glyphocr(&["binarize", s(&dir.path().join("nope.pgm")), "o.pbm"]).status.code(), Some(2));

    let good = dir.path().join("good.pbm");
    write_pbm(&good, &bar(2, 2));
    let unwritable = dir.path().join("no/such/dir/o.pbm");
    assert_eq!(glyphocr(&["binarize", s(&good), s(&unwritable)]).status.code(), Some(4));
    assert_eq!(glyphocr(&["segment", s(&good), "--gap-factor", "0"]).status.code(), Some(1));
}

#[test]
fn binarize_gray_with_threshold_and_invert() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.pgm");
    fs::write(&input, b"P2\n4 1\n255\n10 100 150 240\n").unwrap();
    let out = dir.path().join("o.pbm");
    assert!(glyphocr(&["binarize", s(&input), s(&out), "--threshold", "128"]).status.success());
    assert_eq!(read_pbm(&out).to_ascii(), "##..\n");
    assert!(glyphocr(&["binarize", s(&input), s(&out), "--threshold", "128", "--invert"]).status.success());
    assert_eq!(read_pbm(&out).to_ascii(), "..##\n");
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = template_dir(dir.path());
    let (a, b) = (dir.path().join("a.store"), dir.path().join("b.store"));
    assert!(glyphocr(&["train", s(&manifest), s(&a)]).status.success());
    assert!(glyphocr(&["train", s(&manifest), s(&b)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let page = dir.path().join("p.pbm");
    let mut r = BinaryRaster::blank(80, 30).unwrap();
    paste(&mut r, &cross(20), 3, 3);
    paste(&mut r, &ring(20), 30, 5);
    write_pbm(&page, &r);
    let first = glyphocr(&["recognize", s(&page), s(&a), "--k", "2"]);
    let second = glyphocr(&["recognize", s(&page), s(&a), "--k", "2"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}
