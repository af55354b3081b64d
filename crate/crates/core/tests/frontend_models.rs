use std::collections::BTreeSet;

use malsig_core::frontend::{parse_program, ParseErrorKind};
use malsig_core::pds::{post_star, Config, MultiAutomaton};
use malsig_core::testkit::{bfs_configs, golden_dir};

#[test]
fn self_loop_terminates_and_matches_search() {
    let m = parse_program(".entry l\nl: jmp l\n").unwrap();
    let post = post_star(&m.pds, &MultiAutomaton::from_configs(&m.pds, [&m.entry]).unwrap()).unwrap();
    let want: BTreeSet<Config> = bfs_configs(&m.pds, &m.entry, 8, 10_000);
    assert_eq!(post.configs_up_to(4), want);
}

#[test]
fn recursive_procedure_is_finite() {
    let src = "\
.api F arity=1 types=in
.entry main
main: push 1
m2: call rec
m3: halt
rec: push x
r2: call F
r3: jz done
r4: call rec
done: ret
";
    let m = parse_program(src).unwrap();
    let post = post_star(&m.pds, &MultiAutomaton::from_configs(&m.pds, [&m.entry]).unwrap()).unwrap();
    let want: BTreeSet<Config> =
        bfs_configs(&m.pds, &m.entry, 10, 100_000).into_iter().filter(|c| c.stack.len() <= 5).collect();
    assert_eq!(post.configs_up_to(5), want);
}

#[test]
fn control_point_bound() {
    let src = std::fs::read_to_string(golden_dir().join("self_copy.tasm")).unwrap();
    let m = parse_program(&src).unwrap();
    let labels = m.program.instructions.len() + 1;
    let literals = m.pds.alphabet().iter().filter(|s| s.is_literal()).count();
    let api_points: usize = m.api.len() * (1 + 3);
    assert!(m.pds.points().len() <= labels * (literals + 1usize).pow(4) + api_points);
}

#[test]
fn api_points_map_back_to_declared_names() {
    let src = std::fs::read_to_string(golden_dir().join("self_copy.tasm")).unwrap();
    let m = parse_program(&src).unwrap();
    let names: BTreeSet<&str> = m.api.iter().map(|(_, e)| e.name.as_str()).collect();
    assert_eq!(names, BTreeSet::from(["CopyFile", "GetModuleFileName"]));
    for (p, e) in m.api.iter() {
        assert!(m.pds.contains_point(p));
        assert!(p.as_str().starts_with(&format!("api:{}", e.name)));
    }
}

#[test]
fn golden_files_round_trip() {
    let mut files = malsig_core::testkit::golden_files("train");
    files.extend(malsig_core::testkit::golden_files("malicious"));
    files.extend(malsig_core::testkit::golden_files("benign"));
    assert!(files.len() >= 26);
    for f in files {
        let src = std::fs::read_to_string(&f).unwrap();
        let m = parse_program(&src).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let again = parse_program(&m.program.to_tasm()).unwrap();
        assert_eq!((m.pds, m.api, m.entry), (again.pds, again.api, again.entry), "{}", f.display());
    }
}

#[test]
fn error_locations() {
    let cases: [(&str, usize, usize); 4] = [
        (".entry a\na: push\n", 2, 8),
        (".entry a\na: frob x\n", 2, 4),
        (".entry a\na: call Nope\n", 2, 9),
        (".api F arity=x\n.entry a\na: halt\n", 1, 8),
    ];
    for (src, line, column) in cases {
        let e = parse_program(src).unwrap_err();
        assert_eq!((e.line, e.column), (line, column), "{src:?}: {e}");
    }
    let e = parse_program(".entry a\na: call Nope\n").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UndeclaredApi("Nope".into()));
}
