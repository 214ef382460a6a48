use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn graphterp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphterp")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cutoff_of_a_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "n=2\n0\t1\t1.0\n");
    let known = write(dir.path(), "s.txt", "0\n");
    let o = graphterp(&["cutoff", "--graph", &graph, "--known", &known]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let omega: f64 = out.lines().next().unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    assert!((omega - 2f64.sqrt()).abs() < 1e-12);
    assert!(out.contains("k\t1"));
}

#[test]
fn interpolate_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "# twin vertices\nn=2\n0\t1\t1.0\n");
    let signal = write(dir.path(), "f.txt", "0\t3.0\n");
    for method in ["lsr", "ilsr", "rbm", "irbm"] {
        let out_path = dir.path().join(format!("{method}.txt"));
        let o = graphterp(&[
            "interpolate", "--graph", &graph, "--signal", &signal, "--method", method,
            "--out", out_path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&out_path).unwrap();
        let values: Vec<f64> = text.lines().map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(values.len(), 2);
        assert!((values[0] - 3.0).abs() < 1e-4, "{method}: {values:?}");
        assert!((values[1] - 3.0).abs() < 1e-3, "{method}: {values:?}");
    }
}

#[test]
fn polynomial_mode_and_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "n=3\n0\t1\t1.0\n1\t2\t1.0\n");
    let signal = write(dir.path(), "f.txt", "0\t1.0\n2\t2.0\n");
    let o = graphterp(&["interpolate", "--graph", &graph, "--signal", &signal, "--method", "irbm", "--degree", "25"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = graphterp(&["interpolate", "--graph", &graph, "--signal", &signal, "--method", "ilsr", "--max-iters", "1", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "n=2\n0\t0\t1.0\n");
    let signal = write(dir.path(), "f.txt", "0\t1.0\n");
    let o = graphterp(&["interpolate", "--graph", &graph, "--signal", &signal, "--method", "lsr"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("self-loop"));
    let o = graphterp(&["eval", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn ratings_file(dir: &Path) -> String {
    let mut text = String::new();
    for u in 1..=15 {
        for i in 1..=12 {
            if (u * 3 + i) % 4 != 0 {
                let r = 1 + (u + 2 * i) % 5;
                text.push_str(&format!("{u}\t{}\t{r}\t88125{u}{i}\n", 100 + i));
            }
        }
    }
    write(dir, "ratings.tsv", &text)
}

#[test]
fn recsys_predict_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let train = ratings_file(dir.path());
    let test = write(dir.path(), "pairs.csv", "1,104\n2,112\n999,101\n3,555\n");
    for method in ["lsr", "ilsr", "rbm", "irbm", "knn"] {
        let out = dir.path().join(format!("{method}.csv"));
        let o = graphterp(&[
            "recsys-predict", "--train", &train, "--format", "movielens", "--method", method, "--k", "5",
            "--alpha", "0.05", "--sigma-r", "1.0", "--test", &test, "--out", out.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0) | Some(2)), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(&out).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("user,item,prediction"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[2].starts_with("999,101,"));
        for row in rows {
            let p: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert!((1.0..=5.0).contains(&p), "{method}: {row}");
        }
    }
}

#[test]
fn eval_runs_from_config() {
    let dir = tempfile::tempdir().unwrap();
    ratings_file(dir.path());
    let config = write(
        dir.path(),
        "exp.toml",
        "methods = [\"lsr\", \"rbm\", \"knn\"]\nk = 5\nalpha = [0.1, 1.0]\nseed = 3\n\n[dataset]\npath = \"ratings.tsv\"\nformat = \"movielens\"\n",
    );
    let json = dir.path().join("report.json");
    let preds = dir.path().join("preds.csv");
    let o = graphterp(&[
        "eval", "--config", &config, "--json", json.to_str().unwrap(), "--predictions", preds.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(table.contains("rbm[sigma_r=1;alpha=0.1]"), "{table}");
    let report = fs::read_to_string(&json).unwrap();
    assert!(report.contains("\"config_hash\""));
    let csv = fs::read_to_string(&preds).unwrap();
    assert!(csv.starts_with("fold,method,user,item,truth,prediction\n"));

    let again = dir.path().join("preds2.csv");
    graphterp(&["eval", "--config", &config, "--predictions", again.to_str().unwrap()]);
    assert_eq!(csv, fs::read_to_string(&again).unwrap());
}

#[test]
fn eval_with_no_methods_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "exp.toml", "methods = []\n\n[dataset]\npath = \"nowhere.tsv\"\nformat = \"movielens\"\n");
    let o = graphterp(&["eval", "--config", &config]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eval_reports_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    ratings_file(dir.path());
    let config = write(
        dir.path(),
        "exp.toml",
        "methods = [\"irbm\"]\nk = 5\nmax_iters = 1\ntol = 0.0\n\n[dataset]\npath = \"ratings.tsv\"\nformat = \"movielens\"\n",
    );
    let o = graphterp(&["eval", "--config", &config]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eval_runs_on_jester_and_bxbooks() {
    let dir = tempfile::tempdir().unwrap();
    let mut jester = String::new();
    for u in 0..20 {
        let row: Vec<String> = (0..12)
            .map(|j| if (u + j) % 5 == 0 { "99".into() } else { format!("{:.2}", ((u * 7 + j * 3) % 21) as f64 - 10.0) })
            .collect();
        jester.push_str(&format!("{},{}\n", row.iter().filter(|r| *r != "99").count(), row.join(",")));
    }
    write(dir.path(), "jester.csv", &jester);
    let mut bx = String::from("\"User-ID\";\"ISBN\";\"Book-Rating\"\n");
    for u in 0..20 {
        for b in 0..10 {
            if (u * 3 + b) % 4 != 1 {
                bx.push_str(&format!("\"{}\";\"03{b:04}X\";\"{}\"\n", 1000 + u, (u + b) % 11));
            }
        }
    }
    write(dir.path(), "bx.csv", &bx);
    for (file, format) in [("jester.csv", "jester"), ("bx.csv", "bxbooks")] {
        let config = write(
            dir.path(),
            &format!("{format}.toml"),
            &format!(
                "methods = [\"lsr\", \"ilsr\", \"rbm\", \"irbm\", \"knn\"]\nk = 5\n\n[dataset]\npath = \"{file}\"\nformat = \"{format}\"\n"
            ),
        );
        let o = graphterp(&["eval", "--config", &config]);
        assert!(matches!(o.status.code(), Some(0) | Some(2)), "{format}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("knn"), "{format}");
    }
}
