use divgame::testdata::{FIG1, LOOP_0, LOOP_P, WAIT1};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};
use serde_json::json;

fn attach<R>(f: impl for<'py> FnOnce(Python<'py>) -> R) -> R {
    Python::initialize();
    Python::attach(f)
}

fn with_module<R>(f: impl FnOnce(&Bound<'_, PyModule>) -> R) -> R {
    attach(|py| {
        let m = PyModule::new(py, "divgame_py").unwrap();
        divgame_py::divgame_py(&m).unwrap();
        f(&m)
    })
}

#[test]
fn untimed_values_come_back_as_a_dict() {
    with_module(|m| {
        let v = m.getattr("solve").unwrap().call1((FIG1,)).unwrap();
        let d = v.cast::<PyDict>().unwrap();
        assert_eq!(d.len(), 10);
        assert_eq!(d.get_item("v1").unwrap().unwrap().extract::<String>().unwrap(), "-inf");
        assert_eq!(d.get_item("v2").unwrap().unwrap().extract::<i64>().unwrap(), -9);
        let b = m.getattr("brute_force").unwrap().call1((FIG1,)).unwrap();
        assert!(b.eq(&v).unwrap());
        assert!(m.getattr("is_divergent").unwrap().call1((FIG1,)).unwrap().extract::<bool>().unwrap());
    });
}

#[test]
fn timed_values_and_grid() {
    with_module(|m| {
        let at = |x: &str| m.getattr("timed_value").unwrap().call1((WAIT1, "s0", x)).unwrap().extract::<String>().unwrap();
        assert_eq!(at("1/2"), "1/2");
        assert_eq!(at("3/2"), "0");
        let v = m.getattr("solve_timed_game").unwrap().call1((LOOP_P,)).unwrap();
        assert!(v.cast::<PyDict>().unwrap().contains("states").unwrap());
        let g = m.getattr("solve_grid").unwrap().call1((WAIT1, 2)).unwrap();
        assert_eq!(g.get_item("granularity").unwrap().extract::<u32>().unwrap(), 2);
        assert!(!m.getattr("is_divergent").unwrap().call1((LOOP_0,)).unwrap().extract::<bool>().unwrap());
    });
}

#[test]
fn errors_raise_python_exceptions() {
    with_module(|m| {
        let py = m.py();
        let err = m.getattr("solve_timed_game").unwrap().call1((LOOP_0,)).unwrap_err();
        assert!(err.is_instance(py, &m.getattr("NotDivergentError").unwrap().cast_into().unwrap()));
        let err = m.getattr("solve").unwrap().call1(("game untimed\nvertex a\n",)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = m.getattr("solve_grid").unwrap().call1((WAIT1, 0)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

#[test]
fn json_conversion_covers_every_kind() {
    attach(|py| {
        let v = json!({"a": [1, "x", null, true, 1.5], "b": {}});
        let o = divgame_py::to_py(py, &v).unwrap();
        let s: String = o.bind(py).repr().unwrap().extract().unwrap();
        assert_eq!(s, "{'a': [1, 'x', None, True, 1.5], 'b': {}}");
    });
}
