use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relserre"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn appendix_file() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/appendix_curves.csv")
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("relserre-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn exit_codes() {
    let ok = run(&["classify", "--curve", "0,0,0,-7,7", "--label", "2.2.0.1", "--attested"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let out = String::from_utf8(ok.stdout).unwrap();
    assert!(out.contains("2Cn-Serre: true"), "{out}");
    assert!(out.contains("m_E:               28"), "{out}");

    assert_eq!(code(&run(&["classify", "--curve", "1,2,x"])), 2);
    // y^2 = x^3 is singular
    assert_eq!(code(&run(&["classify", "--curve", "0,0,0,0,0"])), 2);
    assert_eq!(code(&run(&["classify", "--curve", "0,0,0,-7,7", "--label", "2.x"])), 2);
    // 37.a1 has full mod-2 image
    assert_eq!(code(&run(&["image", "--curve", "0,0,1,-1,0", "--attested"])), 3);
    assert_eq!(code(&run(&["image", "--curve", "0,0,0,-7,7", "--label", "2.2.0.1", "--attested", "--prime-bound", "2"])), 4);
    assert_eq!(
        code(&run(&["cyclicity", "--curve", "0,0,0,-7,7", "--label", "2.2.0.1", "--attested", "-L", "1000000000"])),
        5
    );
    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 2);
}

#[test]
fn tampered_data_is_rejected() {
    let dir = scratch_dir("tamper");
    let src = include_str!("../../../core/src/paperdata/groups.dat");
    assert!(src.contains("2B 2 1,1,0,1"));
    std::fs::write(dir.join("groups.dat"), src.replace("2B 2 1,1,0,1", "2B 2 0,1,1,1")).unwrap();
    let o = run(&["--data", dir.to_str().unwrap(), "verify", "--suite", "comm"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    // an untouched copy is accepted
    std::fs::write(dir.join("groups.dat"), src).unwrap();
    let o = run(&["--data", dir.to_str().unwrap(), "verify", "--suite", "comm"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn json_round_trips() {
    for args in [
        &["classify", "--curve", "1,-1,1,-68,182", "--label", "2.6.0.1", "--attested", "--json"][..],
        &["image", "--curve", "0,0,0,-7,7", "--label", "2.2.0.1", "--attested", "--json"][..],
        &["cyclicity", "--curve", "0,0,0,-7,7", "--label", "2.2.0.1", "--attested", "-L", "1000", "--json"][..],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()), text, "{args:?}");
    }
}

#[test]
fn batch_is_deterministic() {
    let f = appendix_file();
    let one = run(&["batch", f.to_str().unwrap(), "--attested", "--jobs", "1"]);
    let many = run(&["batch", f.to_str().unwrap(), "--attested", "--jobs", "4"]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stderr, many.stderr);
    let err = String::from_utf8(one.stderr).unwrap();
    assert!(err.contains("summary: rows=25 2B=7 2Cn=3 2Cs=15 relative_serre=25 errors=0"), "{err}");
}

#[test]
fn batch_reports_a_bad_row_and_continues() {
    let dir = scratch_dir("badrow");
    let text = std::fs::read_to_string(appendix_file()).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    // make row 5 singular: y^2 = x^3
    let name = lines[5].split(',').next().unwrap().to_owned();
    lines[5] = format!("{name},0,0,0,0,0,");
    let path = dir.join("bad.csv");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = run(&["batch", path.to_str().unwrap(), "--attested"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let status: Vec<String> = rdr.records().map(|r| r.unwrap()[2].to_owned()).collect();
    assert_eq!(status.len(), 25);
    assert_eq!(status.iter().filter(|s| *s == "ok").count(), 24);
    assert_eq!(status[4], "error");
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 6: "), "{err}");
    assert!(err.contains("errors=1"), "{err}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn empty_batch_is_fine() {
    let dir = scratch_dir("empty");
    let path = dir.join("empty.csv");
    std::fs::write(&path, "name,a1,a2,a3,a4,a6,label\n").unwrap();
    let o = run(&["batch", path.to_str().unwrap(), "--attested"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stderr).unwrap().contains("rows=0"));
    std::fs::remove_dir_all(dir).ok();
}
