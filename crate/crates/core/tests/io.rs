use nlwave::grid::{Field6, Grid2D, RadialProfile};
use nlwave::io::*;
use nlwave::Error;

fn field() -> Field6<f64> {
    let g = Grid2D::new(16, 20, 0.37).unwrap();
    Field6::from_fn(g, |x: f64, y: f64| {
        [x.sin() / 3.0, y * 1e-300, -x * y, f64::MIN_POSITIVE, (x + y).exp(), 1.0 / 7.0]
    })
}

#[test]
fn binary_round_trip_is_bitwise() {
    let u = field();
    let mut buf = Vec::new();
    write_field6(&mut buf, &u, -1.25).unwrap();
    assert_eq!(buf.len(), 40 + 48 * 16 * 20);
    let (v, k) = read_field6(&mut buf.as_slice()).unwrap();
    assert_eq!(k, -1.25);
    assert_eq!(v.grid(), u.grid());
    for c in 0..6 {
        for (a, b) in u.comps[c].iter().zip(&v.comps[c]) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn malformed_files_are_rejected() {
    let u = field();
    let mut buf = Vec::new();
    write_field6(&mut buf, &u, 1.0).unwrap();
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(matches!(read_field6(&mut bad.as_slice()), Err(Error::Format(_))));
    let short = &buf[..buf.len() - 3];
    assert!(matches!(read_field6(&mut &short[..]), Err(Error::Format(_))));
    let mut long = buf.clone();
    long.push(0);
    assert!(matches!(read_field6(&mut long.as_slice()), Err(Error::Format(_))));
    assert!(read_field6(&mut &buf[..10]).is_err());
}

#[test]
fn files_round_trip_through_disk() {
    let dir = std::env::temp_dir().join(format!("nlwave-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("u.f6");
    save_field6(&path, &field(), 2.0).unwrap();
    let (v, k) = load_field6(&path).unwrap();
    assert_eq!(k, 2.0);
    assert_eq!(v, field());
    write_atomic(&dir.join("a.json"), b"{}").unwrap();
    assert_eq!(std::fs::read(dir.join("a.json")).unwrap(), b"{}");
    assert!(!dir.join(".a.json.tmp").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn csv_writers_emit_headers_and_rows() {
    let u = field();
    let mut out = Vec::new();
    write_field_csv(&mut out, &u).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 20);
    assert!(text.starts_with("x1,x2,U1,U2,U3,Ut1,Ut2,Ut3\n"));
    let p = RadialProfile::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.25]);
    let q = RadialProfile::new(vec![0.0, 2.0], vec![0.0, 2.0]);
    let mut out = Vec::new();
    write_profiles_csv(&mut out, &["a", "b"], &[&p, &q]).unwrap();
    let text = String::from_utf8(out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "r,a,b");
    assert_eq!(rows.len(), 4);
    let mid: Vec<f64> = rows[2].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(mid, vec![1.0, 0.5, 1.0]);
    assert!(write_profiles_csv(&mut Vec::new(), &["a"], &[&p, &q]).is_err());
}
