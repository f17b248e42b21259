use proptest::prelude::*;
use wedderburn::Matrix;
use wedderburn_cli::io::{parse_csv, parse_matrix_market, read_matrix, to_csv, to_matrix_market, write_matrix, Format};
use wedderburn_cli::CliError;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
    ]
}

fn matrix() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(m, n)| {
        proptest::collection::vec(finite(), m * n).prop_map(move |d| Matrix::new(m, n, d).unwrap())
    })
}

proptest! {
    #[test]
    fn matrix_market_round_trip(a in matrix()) {
        prop_assert_eq!(parse_matrix_market(&to_matrix_market(&a)).unwrap(), a);
    }

    #[test]
    fn csv_round_trip(a in matrix()) {
        prop_assert_eq!(parse_csv(&to_csv(&a)).unwrap(), a);
    }

    #[test]
    fn file_round_trip(a in matrix(), csv in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let (name, format) = if csv { ("a.csv", Format::Csv) } else { ("a.mtx", Format::Mm) };
        let path = dir.path().join(name);
        write_matrix(&a, &path, format).unwrap();
        prop_assert_eq!(read_matrix(&path, None).unwrap(), a);
    }
}

#[test]
fn zero_and_scalar_round_trip() {
    for a in [Matrix::zeros(3, 2), Matrix::from_rows(&[[-2.5]]).unwrap()] {
        assert_eq!(parse_matrix_market(&to_matrix_market(&a)).unwrap(), a);
        assert_eq!(parse_csv(&to_csv(&a)).unwrap(), a);
    }
}

#[test]
fn array_storage_is_column_major() {
    let a = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
    assert_eq!(a, Matrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]).unwrap());
}

#[test]
fn coordinate_storage_fills_zeros() {
    let a = parse_matrix_market(
        "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 3 5.5\n2 1 -1\n",
    )
    .unwrap();
    assert_eq!(a, Matrix::from_rows(&[[0.0, 0.0, 5.5], [-1.0, 0.0, 0.0]]).unwrap());
}

#[test]
fn csv_rows() {
    let a = parse_csv("1,2,1\n2,3,2\n1,1,2\n").unwrap();
    assert_eq!(
        a,
        Matrix::from_rows(&[[1.0, 2.0, 1.0], [2.0, 3.0, 2.0], [1.0, 1.0, 2.0]]).unwrap()
    );
}

#[test]
fn duplicate_coordinate_rejected() {
    let err = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n").unwrap_err();
    match err {
        CliError::Parse { line, message, .. } => {
            assert_eq!(line, 4);
            assert!(message.contains("duplicate"), "{message}");
        }
        other => panic!("{other}"),
    }
}

#[test]
fn short_array_rejected() {
    assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").is_err());
}

#[test]
fn non_finite_rejected() {
    assert!(parse_csv("1,inf\n").is_err());
    assert!(parse_csv("NaN\n").is_err());
}

#[test]
fn banner_sniffed_without_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.txt");
    std::fs::write(&path, "%%MatrixMarket matrix array real general\n1 2\n7\n8\n").unwrap();
    assert_eq!(read_matrix(&path, None).unwrap(), Matrix::from_rows(&[[7.0, 8.0]]).unwrap());
    std::fs::write(&path, "7,8\n").unwrap();
    assert_eq!(read_matrix(&path, None).unwrap(), Matrix::from_rows(&[[7.0, 8.0]]).unwrap());
}
