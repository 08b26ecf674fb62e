use pimac_expcli::{load_channel, parse_channel, ChannelError};

fn polar(ch: &pimac::model::ChannelInstance, i: usize, j: usize) -> (f64, f64) {
    let h = ch.gain(i, j);
    (h.norm(), h.arg())
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
}

#[test]
fn builtin_gains() {
    let h1 = load_channel("H1").unwrap();
    assert!(close(polar(&h1, 1, 2), (2.85, 2.41)));
    assert!(close(polar(&h1, 0, 0), (2.03, -0.68)));
    let h2 = load_channel("h2").unwrap();
    assert!(close(polar(&h2, 1, 2), (3.4, 2.23)));
    assert!(close(polar(&h2, 0, 1), (2.3, 2.52)));
    assert_eq!(h1.noise_variance(), 1.0);
    assert_eq!(h1.power_caps(), &[1.0; 3]);
}

#[test]
fn hprime_family() {
    let h = load_channel("H1+Hprime(7)").unwrap();
    assert_eq!(h.users(), 7);
    assert!(close(polar(&h, 0, 3), (0.40, 1.3972)));
    assert!(close(polar(&h, 1, 6), (0.67, -1.6414)));
    assert!(close(polar(&h, 1, 2), (2.85, 2.41)));
    let h4 = load_channel("H1+Hprime(4)").unwrap();
    assert_eq!(h4.users(), 4);
    assert!(close(polar(&h4, 1, 3), (1.24, -0.9872)));
    assert_eq!(load_channel("H1+Hprime").unwrap().users(), 7);
    assert!(matches!(load_channel("H1+Hprime(9)"), Err(ChannelError::Unknown(_))));
    assert!(matches!(load_channel("H3"), Err(ChannelError::Unknown(_))));
}

#[test]
fn file_round_trip() {
    let text = "# two MAC users\nJ=3 sigma2=2 caps=1,2,3\n1 1 2.03 -0.68\n1 2 2.1 2.64\n1 3 3.2 1.48\n\n2 1 4.7 1.97\n2 2 4.5 -0.66\n2 3 2.85 2.41 # p2p link\n";
    let ch = parse_channel(text).unwrap();
    let h1 = load_channel("H1").unwrap();
    assert_eq!(ch.gains(), h1.gains());
    assert_eq!(ch.noise_variance(), 2.0);
    assert_eq!(ch.power_caps(), &[1.0, 2.0, 3.0]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    std::fs::write(&path, text).unwrap();
    assert_eq!(load_channel(path.to_str().unwrap()).unwrap(), ch);
}

fn parse_error(text: &str) -> (usize, usize) {
    match parse_channel(text) {
        Err(ChannelError::Parse { line, column, .. }) => (line, column),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn parse_errors_carry_positions() {
    let head = "J=2 sigma2=1 caps=1,1\n";
    assert_eq!(parse_error(&format!("{head}1 1 abc 0.1\n")), (2, 5));
    assert_eq!(parse_error(&format!("{head}1 1 1.0\n")), (2, 1));
    assert_eq!(parse_error(&format!("{head}3 1 1.0 0.0\n")), (2, 1));
    assert_eq!(parse_error(&format!("{head}1 5 1.0 0.0\n")), (2, 3));
    assert_eq!(parse_error(&format!("{head}1 1 -1 0\n")), (2, 5));
    assert_eq!(parse_error(&format!("{head}1 1 1 0\n1 1 1 0\n")), (3, 1));
    assert_eq!(parse_error(&format!("{head}1 1 1 0\n")), (1, 1));
    assert_eq!(parse_error("J=2 sigma2=1 caps=1,x\n"), (1, 21));
    assert_eq!(parse_error("J=2 colour=red\n"), (1, 5));
    assert_eq!(parse_error("J=3 caps=1,1\n"), (1, 1));
    assert_eq!(parse_error(""), (1, 1));
}
