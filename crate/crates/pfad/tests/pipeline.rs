//! End-to-end checks of the command-line pipeline: exit codes, write
//! discipline, manifest regeneration, and byte-level reproducibility.

use std::fs;
use std::path::Path;

use pfad::{cli, load_image, save_png16, DatasetManifest};

fn run(args: &[&str]) -> i32 {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    cli::run(&owned)
}

/// A tiny simulated corpus shared by several tests.
fn simulate_small(dir: &Path) {
    let out = dir.to_str().unwrap();
    let code = run(&[
        "simulate", "--seed", "5", "--count", "4", "--size", "32", "--out", out,
    ]);
    assert_eq!(code, 0, "simulate should succeed");
}

#[test]
fn unknown_config_key_aborts_before_any_write() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never_created");
    let code = run(&[
        "simulate",
        "--sees",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(
        !out.exists(),
        "a rejected config must not leave an output directory behind"
    );
}

#[test]
fn bad_command_line_is_a_config_error() {
    assert_eq!(run(&[]), 2);
    assert_eq!(run(&["transmogrify", "--out", "x"]), 2);
    assert_eq!(run(&["simulate"]), 2);
    // Readable out dir but a value that fails validation.
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(
        run(&[
            "simulate", "--delta_min", "3.0", "--delta_max", "2.0",
            "--out", out.to_str().unwrap(),
        ]),
        2
    );
}

#[test]
fn manifest_regeneration_reproduces_corrupted_files_bit_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    simulate_small(&data);

    let mpath = data.join("manifest.json");
    let manifest = DatasetManifest::load(&mpath).unwrap();
    assert_eq!(manifest.entries.len(), 4);

    for entry in &manifest.entries {
        let (clean_path, corrupted_path) = manifest.resolve(&mpath, entry);
        let clean = load_image(&clean_path).unwrap();
        let regenerated = entry.params.simulate(&clean, entry.seed).unwrap();

        let replay = tmp.path().join("replay.png");
        save_png16(&replay, &regenerated).unwrap();
        assert_eq!(
            fs::read(&replay).unwrap(),
            fs::read(&corrupted_path).unwrap(),
            "replayed {} differs from the recorded file",
            entry.corrupted_path,
        );
    }
}

#[test]
fn purify_skips_bad_items_and_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("input");
    fs::create_dir_all(&input).unwrap();

    let phantom = pfad::generate_phantom(&pfad::PhantomSpec {
        size: 32,
        ellipse_count: 3,
        intensity_range: (0.1, 0.9),
        seed: 2,
    })
    .unwrap();
    save_png16(&input.join("good.png"), &phantom).unwrap();
    fs::write(input.join("broken.png"), b"not a png").unwrap();

    let out = tmp.path().join("out");
    let code = run(&[
        "purify",
        "--input", input.to_str().unwrap(),
        "--oracle", "true",
        "--t_steps", "10",
        "--seed", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "one broken input means exit code 1");
    assert!(out.join("good.png").exists(), "good items still processed");
    assert!(!out.join("broken.png").exists());
}

#[test]
fn evaluate_reports_unmatched_names_as_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let img = pfad::generate_phantom(&pfad::PhantomSpec {
        size: 32,
        ellipse_count: 3,
        intensity_range: (0.1, 0.9),
        seed: 3,
    })
    .unwrap();
    save_png16(&a.join("shared.png"), &img).unwrap();
    save_png16(&a.join("only_a.png"), &img).unwrap();
    save_png16(&b.join("shared.png"), &img).unwrap();
    save_png16(&b.join("only_b.png"), &img).unwrap();

    let out = tmp.path().join("out");
    let code = run(&[
        "evaluate",
        "--candidate", a.to_str().unwrap(),
        "--reference", b.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("only_a.png"));
    assert!(report.contains("only_b.png"));
    // The matched pair is identical, so it scores at the PSNR cap.
    assert!(report.contains("shared.png"));
}

#[test]
fn repeated_runs_write_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut snapshots: Vec<Vec<(String, Vec<u8>)>> = Vec::new();

    for round in 0..2 {
        let root = tmp.path().join(format!("round{round}"));
        let data = root.join("data");
        simulate_small(&data);

        let pure = root.join("pure");
        assert_eq!(
            run(&[
                "purify",
                "--input", data.to_str().unwrap(),
                "--oracle", "true",
                "--t_steps", "20",
                "--seed", "5",
                "--trace", "true",
                "--out", pure.to_str().unwrap(),
            ]),
            0
        );
        let eval = root.join("eval");
        assert_eq!(
            run(&[
                "evaluate",
                "--candidate", pure.to_str().unwrap(),
                "--reference", data.join("clean").to_str().unwrap(),
                "--baseline", data.join("corrupted").to_str().unwrap(),
                "--out", eval.to_str().unwrap(),
            ]),
            0
        );

        // Every file the round produced, keyed by path relative to the
        // round directory.
        let mut files = Vec::new();
        let mut stack = vec![root.clone()];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(&root).unwrap();
                    files.push((
                        rel.to_string_lossy().into_owned(),
                        fs::read(&path).unwrap(),
                    ));
                }
            }
        }
        files.sort_by(|x, y| x.0.cmp(&y.0));
        snapshots.push(files);
    }

    let names: Vec<&String> = snapshots[0].iter().map(|(n, _)| n).collect();
    assert!(names.iter().any(|n| n.contains("report.tsv")));
    assert!(names.iter().any(|n| n.contains("trace")));
    assert_eq!(snapshots[0], snapshots[1], "two rounds must agree byte for byte");
}
