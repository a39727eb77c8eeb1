mod common;

use common::{check_script, corpus_scripts};

#[test]
fn corpus_matches_goldens() {
    let scripts = corpus_scripts();
    assert!(scripts.len() >= 12, "corpus has {} scripts", scripts.len());
    let mut failures = Vec::new();
    let mut invalid = 0;
    for path in &scripts {
        let c = check_script(path);
        if !c.valid {
            invalid += 1;
        }
        if let Some(p) = c.problem {
            failures.push(format!("{}: {p}", c.name));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(invalid >= 5, "only {invalid} malformed scripts");
}

#[test]
fn entangler_and_ghz_pipelines_present() {
    let names: Vec<String> =
        corpus_scripts().iter().map(|p| p.file_stem().unwrap().to_string_lossy().into_owned()).collect();
    for n in ["entangler_balanced", "ghz_step"] {
        assert!(names.iter().any(|x| x == n), "missing {n}");
    }
}
