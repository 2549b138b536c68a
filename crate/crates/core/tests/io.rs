use std::f64::consts::FRAC_PI_4;

use acmoduli::discretization::QuadrantGrid;
use acmoduli::io::{load_acf, save_acf, write_spectrum_csv, SolutionFile};
use acmoduli::potential::Model;
use acmoduli::solver::{newton_solve, SolveOptions};
use acmoduli::spectra::{sector_eigenvalues, SymmetrySector};
use acmoduli::Error;

#[test]
fn solution_survives_a_file_round_trip() {
    let model = Model::quartic();
    let grid = QuadrantGrid::new(7.8, 0.2).unwrap();
    let sol = newton_solve(grid, &model, FRAC_PI_4, 0.0, None, &SolveOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("saddle.acf");
    let file = SolutionFile::from_solution(&sol);
    save_acf(&path, &file).unwrap();
    let back = load_acf(&path).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.classify, sol.classification.unwrap().pair());
    let again = dir.path().join("again.acf");
    save_acf(&again, &back).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_acf(&dir.path().join("absent.acf")),
        Err(Error::Io(_))
    ));
}

#[test]
fn spectrum_table_lists_every_sector() {
    let model = Model::quartic();
    let grid = QuadrantGrid::new(7.8, 0.2).unwrap();
    let sol = newton_solve(grid, &model, FRAC_PI_4, 0.0, None, &SolveOptions::default()).unwrap();
    let reports: Vec<_> = SymmetrySector::ALL
        .iter()
        .map(|&s| sector_eigenvalues(&sol.field, &model.potential, s, 5.0, 3).unwrap())
        .collect();
    let mut buf = Vec::new();
    write_spectrum_csv(&mut buf, &reports).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sector,R,lambda_1,lambda_2,lambda_3");
    assert!(lines[1].starts_with("even-even,5,-"));
    assert_eq!(lines.len(), 5);
}
