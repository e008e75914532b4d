use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linrec::numeration::{POWERS_OF_TWO_WEIGHT3, REFERENCE_LISTS};
use rug::Integer;
use tempfile::TempDir;

const ZB_SIDES: &str = "schema_version = 1

[left]
recurrence = [1, 1]
initial = [1, 2]
numeration = true

[right]
recurrence = [2]
initial = [1]
numeration = true
";

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn zb(dir: &TempDir, problem: &str) -> PathBuf {
    write(dir, "zb.toml", &format!("{ZB_SIDES}\n[problem]\n{problem}\n"))
}

fn linrec(args: &[&str], config: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_linrec"));
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Leading integers of the non-comment lines of a solutions listing.
fn values(listing: &str) -> Vec<Integer> {
    listing
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect()
}

/// Runs the full pipeline and returns the solutions certificate.
fn pipeline_solutions(config: &Path) -> String {
    let dir = TempDir::new().unwrap();
    let o = linrec(&["pipeline", "--out", dir.path().to_str().unwrap()], Some(config));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    fs::read_to_string(dir.path().join("05-solutions.txt")).unwrap()
}

fn zeckendorf_weight(mut n: u64) -> u32 {
    let mut f = vec![1u64, 2];
    while *f.last().unwrap() <= n {
        f.push(f[f.len() - 1] + f[f.len() - 2]);
    }
    let mut w = 0;
    for &t in f.iter().rev() {
        if t <= n {
            n -= t;
            w += 1;
        }
    }
    w
}

#[test]
fn analyze_reports_certified_roots() {
    let dir = TempDir::new().unwrap();
    let fib = write(
        &dir,
        "fib.toml",
        "schema_version = 1\n[left]\nrecurrence = [1, 1]\ninitial = [0, 1]\ncoefficients = [1]\n\
         [right]\nrecurrence = [2]\ninitial = [1]\ncoefficients = [1]\n",
    );
    let o = linrec(&["analyze"], Some(&fib));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("characteristic polynomial: X^2 - X - 1"), "{out}");
    assert!(out.contains("dominant root alpha: [1.6180339887498948482, 1.6180339887498948483]"), "{out}");

    let o = linrec(&["analyze"], Some(&shipped("tribonacci_powers_of_three.toml")));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dominant root alpha: [1.839286755214161132"), "{}", stdout(&o));
}

#[test]
fn degenerate_recurrence_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "xsq.toml",
        "schema_version = 1\n[left]\nrecurrence = [0, 1]\ninitial = [1, 2]\ncoefficients = [1]\n\
         [right]\nrecurrence = [2]\ninitial = [1]\ncoefficients = [1]\n",
    );
    let o = linrec(&["analyze"], Some(&p));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("non-degenerate: NO"), "{}", stderr(&o));
    assert!(stderr(&o).contains("not admissible: left"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (ZB_SIDES.replace("initial = [1, 2]", "initial = [1, 2"), ":6:1:"),
        (ZB_SIDES.replace("schema_version = 1", "schema_version = 2"), ":1:18:"),
        (format!("{ZB_SIDES}\n[problem]\nmax_weight = 3\nmax_wieght = 4\n"), ":15:1:"),
        (ZB_SIDES.replace("initial = [1]", "initial = [1, 1]"), ":10:11:"),
        (format!("{ZB_SIDES}\n[problem]\nweights = [2]\n"), ":14:11:"),
    ];
    for (i, (text, at)) in cases.iter().enumerate() {
        let p = write(&dir, &format!("bad{i}.toml"), text);
        let o = linrec(&["analyze"], Some(&p));
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(stderr(&o).contains(&format!("bad{i}.toml{at}")), "case {i}: {}", stderr(&o));
    }
    let o = linrec(&["analyze"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_dominant_tuple_prints_the_witness() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "nd.toml",
        "schema_version = 1\n[left]\nrecurrence = [1, 1]\ninitial = [1, 2]\ncoefficients = [1, -1, -1, 1]\n\
         [right]\nrecurrence = [2]\ninitial = [1]\ncoefficients = [1]\n",
    );
    let o = linrec(&["pipeline"], Some(&p));
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("stage dominance:"), "{err}");
    assert!(err.contains("witness exponents (2, 1, 0)"), "{err}");
}

#[test]
fn weight_four_pipeline_writes_certificates() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("certs");
    let o = linrec(&["pipeline", "--out", out.to_str().unwrap()], Some(&shipped("zeckendorf_binary.toml")));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let listing = fs::read_to_string(out.join("05-solutions.txt")).unwrap();
    let got: Vec<u64> = values(&listing).iter().map(|v| v.to_u64().unwrap()).collect();

    // The published M = 4 list is missing 128 = F_9 + F_7 + F_3 = 2^7.
    let mut want: BTreeSet<u64> = REFERENCE_LISTS[2].1.iter().copied().collect();
    want.insert(128);
    assert_eq!(got, want.iter().copied().collect::<Vec<_>>());
    let oracle: Vec<u64> = (1..=100_000u64).filter(|&n| zeckendorf_weight(n) + n.count_ones() == 4).collect();
    assert_eq!(got, oracle);
    assert!(listing.contains("128\tG: 9,7,3 (classical F_11 + F_9 + F_5)\tH: 7"), "{listing}");

    for f in ["01-analyze.txt", "02-dominance.txt", "03-bound.txt", "04-campaign.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let campaign = fs::read_to_string(out.join("04-campaign.txt")).unwrap();
    assert!(campaign.contains("[k=3, l=1]") && campaign.contains("final: n1 <= 264, m1 <= 184"), "{campaign}");
}

#[test]
fn single_split_lists() {
    let dir = TempDir::new().unwrap();
    assert_eq!(values(&pipeline_solutions(&zb(&dir, "weights = [1, 1]"))), vec![1, 2, 8]);
    let want: Vec<Integer> = POWERS_OF_TWO_WEIGHT3.iter().map(|(m, _)| Integer::from(1) << *m).collect();
    assert_eq!(values(&pipeline_solutions(&shipped("zeckendorf_binary_weight3.toml"))), want);
}

#[test]
fn tuple_pipeline_matches_direct_search() {
    let out = pipeline_solutions(&shipped("tribonacci_powers_of_three.toml"));
    let header = out.lines().find(|l| l.starts_with("# solutions with")).unwrap();
    let nums: Vec<u64> = header.split_whitespace().filter_map(|t| t.parse().ok()).collect();
    let (n1_max, m1_max) = (nums[0], nums[1]);

    let mut t = vec![Integer::from(0), Integer::from(1), Integer::from(1)];
    while t.len() as u64 <= n1_max {
        let l = t.len();
        t.push(Integer::from(&t[l - 1] + &t[l - 2]) + &t[l - 3]);
    }
    let powers: HashSet<Integer> = (0..=m1_max as u32).map(|m| Integer::from(Integer::u_pow_u(3, m))).collect();
    let mut oracle = vec![];
    for a in 0..=n1_max as usize {
        for b in 0..a {
            let v = Integer::from(&t[a] + &t[b]);
            if powers.contains(&v) {
                oracle.push(format!("{v}\tn=({a},{b})"));
            }
        }
    }
    let mut got: Vec<String> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.rsplit_once('\t').unwrap().0.to_string())
        .collect();
    got.sort();
    oracle.sort();
    assert!(!oracle.is_empty());
    assert_eq!(got, oracle);
}

#[test]
fn verify_built_in_and_mutated_tables() {
    let o = linrec(&["verify"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = linrec(&["verify", "--raw"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("M = 5: listed but not found [128], found but not listed [7, 56]"), "{}", stdout(&o));

    let dir = TempDir::new().unwrap();
    let text: String = REFERENCE_LISTS
        .iter()
        .map(|(m, l)| format!("{m}: {}\n", l.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    let p = write(&dir, "tables.txt", &text.replace("2592", "2593"));
    let o = linrec(&["verify", "--tables", p.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("M = 5: listed but not found [2593], found but not listed [2592]"), "{}", stdout(&o));
    let p = write(&dir, "broken.txt", "2: 1, 2, 8\n3 3, 4\n");
    let o = linrec(&["verify", "--tables", p.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("broken.txt:2:"));
}

#[test]
fn jobs_do_not_change_output() {
    let dir = TempDir::new().unwrap();
    let p = zb(&dir, "weights = [2, 1]");
    let a = linrec(&["--jobs", "1", "pipeline", "--annotate"], Some(&p));
    let b = linrec(&["--jobs", "3", "pipeline", "--annotate"], Some(&p));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn checkpoints_need_resume() {
    let dir = TempDir::new().unwrap();
    let p = zb(&dir, "weights = [2, 1]");
    let ck = dir.path().join("ck");
    let ck = ck.to_str().unwrap();
    let first = linrec(&["--checkpoint", ck, "campaign"], Some(&p));
    assert_eq!(first.status.code(), Some(0));
    let again = linrec(&["--checkpoint", ck, "campaign"], Some(&p));
    assert_eq!(again.status.code(), Some(2));
    assert!(stderr(&again).contains("--resume"));
    let resumed = linrec(&["--checkpoint", ck, "--resume", "campaign"], Some(&p));
    assert_eq!(resumed.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&resumed));
}

#[test]
fn sampled_campaign_is_conditional() {
    let dir = TempDir::new().unwrap();
    let p = zb(&dir, "weights = [3, 1]\n\n[campaign]\nslice = { level = 6, modulus = 50 }");
    let o = linrec(&["campaign"], Some(&p));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).contains("CONDITIONAL"));
}

#[test]
fn stages_and_single_commands() {
    let dir = TempDir::new().unwrap();
    let p = zb(&dir, "max_weight = 4");
    let out = dir.path().join("certs");
    let o = linrec(&["pipeline", "--stage", "bound", "--out", out.to_str().unwrap()], Some(&p));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("03-bound.txt").exists() && !out.join("04-campaign.txt").exists());
    let bound = fs::read_to_string(out.join("03-bound.txt")).unwrap();
    assert_eq!(bound.matches("n1 <= ").count(), 3, "{bound}");

    let o = linrec(&["reduce", "--split", "3,1"], Some(&p));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("method: BakerDavenport"));
    assert!(stdout(&o).contains("min(n1 - n_K, m1 - m_L) <= 245"), "{}", stdout(&o));
    let o = linrec(&["reduce", "--split", "3,1", "--pair", "3,2"], Some(&p));
    assert_eq!(o.status.code(), Some(2));

    let o = linrec(&["enumerate", "--brute", "100000"], Some(&p));
    assert_eq!(o.status.code(), Some(0));
    let brute = values(&stdout(&o));
    let o = linrec(&["enumerate", "--n1-max", "264", "--m1-max", "184"], Some(&p));
    assert_eq!(values(&stdout(&o)), brute);
    assert_eq!(linrec(&["enumerate"], Some(&p)).status.code(), Some(2));
}
