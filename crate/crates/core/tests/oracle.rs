mod common;

use common::*;

use pcq::circuit::integrate;
use pcq::compile::random_circuit;
use pcq::ops::uniform_circuit;
use pcq::oracle::{dense_table, oracle_query, table, DenseTable, OracleQuery};
use pcq::{Error, Variable};

fn t1(values: &[f64]) -> DenseTable {
    DenseTable::new(vec![Variable::new(1, values.len()).unwrap()], values.to_vec()).unwrap()
}

#[test]
fn forced_tables() {
    let u = uniform_circuit(&[Variable::binary(1), Variable::binary(2)], 3.0).unwrap();
    assert_eq!(table(&u).unwrap().values, vec![3.0; 4]);
    assert_eq!(table(&categorical(1, &[0.0, 1.0])).unwrap().values, vec![0.0, 1.0]);
    let c = random_circuit(7, 10, &flags(true, false)).unwrap();
    assert!(matches!(dense_table(&c, 1000), Err(Error::BudgetExceeded { .. })));
    for seed in 0..10 {
        let c = random_circuit(seed, 9, &flags(seed % 2 == 0, seed % 3 == 0)).unwrap();
        assert!(close(table(&c).unwrap().total(), integrate(&c, &[None; 9]).unwrap(), 1e-9));
    }
}

#[test]
fn forced_queries() {
    let p = t1(&[0.7, 0.3]);
    let h = t1(&[0.5, 0.5]);
    assert_eq!(oracle_query(&OracleQuery::Kld, &[&p, &p]).unwrap(), 0.0);
    assert!((oracle_query(&OracleQuery::Entropy, &[&h]).unwrap() - std::f64::consts::LN_2).abs() <= 1e-15);
    let cs = -(0.7f64 * 0.5 + 0.3 * 0.5).ln() + 0.5 * ((0.49f64 + 0.09) * (0.25 + 0.25)).ln();
    assert!((oracle_query(&OracleQuery::CauchySchwarz, &[&p, &h]).unwrap() - cs).abs() <= 1e-15);

    // zero entries contribute nothing to the logarithmic sums
    let z = t1(&[1.0, 0.0]);
    assert_eq!(oracle_query(&OracleQuery::Entropy, &[&z]).unwrap(), 0.0);

    // independent joint: p(x,y) = p(x)p(y)
    let vars = vec![Variable::binary(1), Variable::binary(2)];
    let ind = DenseTable::new(vars, vec![0.2 * 0.6, 0.2 * 0.4, 0.8 * 0.6, 0.8 * 0.4]).unwrap();
    let mi = oracle_query(&OracleQuery::MutualInformation { x: vec![1], y: vec![2] }, &[&ind]).unwrap();
    assert!(mi.abs() <= 1e-15);
}

#[test]
fn shape_mismatch_is_rejected() {
    let a = t1(&[0.5, 0.5]);
    let b = t1(&[0.2, 0.3, 0.5]);
    assert!(matches!(oracle_query(&OracleQuery::Kld, &[&a, &b]), Err(Error::InvalidArgument(_))));
    assert!(matches!(oracle_query(&OracleQuery::Kld, &[&a]), Err(Error::InvalidArgument(_))));
    assert!(DenseTable::new(vec![Variable::binary(1)], vec![1.0]).is_err());
}
