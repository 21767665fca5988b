use serde_json::Value;
use urtest_demo::{lpb_demo_json, rejection_curve_json, sigma_hat_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn lpb_demo_reports_the_test() {
    let v = parse(lpb_demo_json("ma_neg", 0.0, 100, 99, 1).unwrap());
    assert_eq!(v["series"].as_array().unwrap().len(), 100);
    let p = v["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let counts = v["t_star"]["counts"].as_array().unwrap();
    assert_eq!(counts.iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 99);
    assert_eq!(
        lpb_demo_json("ma_neg", 0.0, 100, 99, 1).unwrap(),
        lpb_demo_json("ma_neg", 0.0, 100, 99, 1).unwrap()
    );
}

#[test]
fn sigma_hat_floor_holds() {
    let v = parse(sigma_hat_json("ma_neg", 0.0, 60, 3, 8).unwrap());
    assert_eq!(v["dim"], 59);
    assert_eq!(v["bandwidth"], 8);
    let floor = v["floor"].as_f64().unwrap();
    let eig: Vec<f64> = v["eigen_floored"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(eig.iter().all(|&e| e >= floor));
    let raw = v["eigen_raw"].as_array().unwrap();
    assert_eq!(raw.len(), eig.len());
    let adaptive = parse(sigma_hat_json("iid", 0.0, 60, 3, 0).unwrap());
    assert!(adaptive["bandwidth"].as_u64().unwrap() >= 1);
}

#[test]
fn rejection_curve_shape() {
    let v = parse(rejection_curve_json("iid", 50, 10, 19, 2).unwrap());
    assert_eq!(v["varphi"].as_array().unwrap().len(), 6);
    for k in ["LPB-PP", "CBB-PP"] {
        let r = v["rates"][k].as_array().unwrap();
        assert_eq!(r.len(), 6);
        assert!(r.iter().all(|x| (0.0..=1.0).contains(&x.as_f64().unwrap())));
    }
}

#[test]
fn bad_inputs_are_errors() {
    assert!(lpb_demo_json("garch", 0.0, 100, 10, 1).is_err());
    assert!(lpb_demo_json("iid", 0.0, 10, 10, 1).is_err());
    assert!(sigma_hat_json("iid", 0.0, 5000, 1, 0).is_err());
    assert!(rejection_curve_json("iid", 100, 0, 10, 1).is_ok());
}
