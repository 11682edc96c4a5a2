use num_complex::Complex64;
use proptest::prelude::*;

use symvqe::ansatz::{build_layered_circuit, build_subspace_ansatz, AnsatzSpec};
use symvqe::linalg::{eigh, ComplexMatrix, ComplexVector};
use symvqe::operators::{pauli_dense, Pauli, PauliString, PauliSum};
use symvqe::simulator::{apply_circuit, basis_state, circuit_unitary, Gate, ParamCircuit};

fn kron_all(factors_lsb_first: &[ComplexMatrix]) -> ComplexMatrix {
    // Qubit 0 is the least significant bit, so it is the rightmost Kronecker factor.
    factors_lsb_first
        .iter()
        .rev()
        .fold(ComplexMatrix::identity(1), |acc, f| acc.kron(f))
}

fn single_qubit(n: usize, target: usize, g: &ComplexMatrix) -> ComplexMatrix {
    let mut factors = vec![ComplexMatrix::identity(2); n];
    factors[target] = g.clone();
    kron_all(&factors)
}

fn rotation(axis: Pauli, theta: f64) -> ComplexMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::identity(2)
        .scale(Complex64::new(c, 0.0))
        .sub(&axis.matrix().scale(Complex64::new(0.0, s)))
        .unwrap()
}

fn cnot_oracle(n: usize, control: usize, target: usize) -> ComplexMatrix {
    let dim = 1 << n;
    ComplexMatrix::from_fn(dim, dim, |r, col| {
        let image = if col >> control & 1 == 1 { col ^ (1 << target) } else { col };
        Complex64::new(if r == image { 1.0 } else { 0.0 }, 0.0)
    })
}

#[derive(Clone, Debug)]
enum Op {
    Rx(usize, f64),
    Ry(usize, f64),
    Cnot(usize, usize),
    X(usize),
}

fn op_strategy(n: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..n, -7.0..7.0f64).prop_map(|(q, t)| Op::Rx(q, t)),
        (0..n, -7.0..7.0f64).prop_map(|(q, t)| Op::Ry(q, t)),
        (0..n, 1..n).prop_map(move |(c, d)| Op::Cnot(c, (c + d) % n)),
        (0..n).prop_map(Op::X),
    ]
}

fn circuit_case() -> impl Strategy<Value = (usize, Vec<Op>)> {
    (2usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(op_strategy(n), 1..24)))
}

fn build(n: usize, ops: &[Op]) -> (ParamCircuit, Vec<f64>, ComplexMatrix) {
    let mut circuit = ParamCircuit::new(n).unwrap();
    let mut params = Vec::new();
    let mut oracle = ComplexMatrix::identity(1 << n);
    for (i, op) in ops.iter().enumerate() {
        let gate = match *op {
            Op::Rx(q, t) => {
                circuit.rx(q, format!("p{i}")).unwrap();
                params.push(t);
                single_qubit(n, q, &rotation(Pauli::X, t))
            }
            Op::Ry(q, t) => {
                circuit.ry(q, format!("p{i}")).unwrap();
                params.push(t);
                single_qubit(n, q, &rotation(Pauli::Y, t))
            }
            Op::Cnot(c, t) => {
                circuit.cnot(c, t).unwrap();
                cnot_oracle(n, c, t)
            }
            Op::X(q) => {
                circuit.x(q).unwrap();
                single_qubit(n, q, &Pauli::X.matrix())
            }
        };
        oracle = gate.matmul(&oracle).unwrap();
    }
    (circuit, params, oracle)
}

fn random_state(n: usize, seed: &[f64]) -> ComplexVector {
    let dim = 1 << n;
    let v = ComplexVector::new((0..dim).map(|i| Complex64::new(seed[i % seed.len()] + i as f64 * 0.1, seed[(i + 1) % seed.len()])).collect());
    v.normalized()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_match_the_kronecker_oracle((n, ops) in circuit_case(), seed in prop::collection::vec(-1.0..1.0f64, 3)) {
        let (circuit, params, oracle) = build(n, &ops);
        let psi = random_state(n, &seed);
        let fast = apply_circuit(&circuit, &params, &psi).unwrap();
        let slow = oracle.mul_vec(&psi).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) < 1e-12);
        prop_assert!(circuit_unitary(&circuit, &params).unwrap().max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn circuits_preserve_the_norm((n, ops) in circuit_case(), seed in prop::collection::vec(-1.0..1.0f64, 3)) {
        let (circuit, params, _) = build(n, &ops);
        let out = apply_circuit(&circuit, &params, &random_state(n, &seed)).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_strings_match_kronecker_products(
        ops in prop::collection::vec(prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)], 1..=4),
        coeff in -3.0..3.0f64,
    ) {
        let n = ops.len();
        let mut sum = PauliSum::new(n);
        sum.push(coeff, PauliString::from_ops(ops.clone())).unwrap();
        let dense = pauli_dense(&sum);
        let factors: Vec<ComplexMatrix> = ops.iter().map(|p| p.matrix()).collect();
        let want = kron_all(&factors).scale(Complex64::new(coeff, 0.0));
        prop_assert!(dense.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_and_orders(dim in 1usize..=10, entries in prop::collection::vec(-2.0..2.0f64, 200)) {
        let a = ComplexMatrix::from_fn(dim, dim, |r, c| Complex64::new(entries[(r * 10 + c) % 200], entries[(c * 10 + r + 100) % 200]));
        let h = a.add(&a.adjoint()).unwrap();
        let eig = eigh(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-9);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &eig.eigenvectors;
        prop_assert!(v.adjoint().matmul(v).unwrap().max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
    }

    #[test]
    fn subspace_ansatz_stays_on_its_support(
        (n, k) in (2usize..=4).prop_flat_map(|n| (Just(n), 2usize..=(1 << n))),
        depth in 1usize..=3,
        seed in prop::collection::vec(0.0..6.3f64, 8),
    ) {
        let spec = AnsatzSpec::new(n, k, depth).unwrap();
        let circuit = build_subspace_ansatz(&spec).unwrap();
        let params: Vec<f64> = (0..circuit.num_params()).map(|i| seed[i % 8] * (1.0 + i as f64 * 0.37)).collect();
        let out = apply_circuit(&circuit, &params, &basis_state(n, 0).unwrap()).unwrap();
        let leak: f64 = out.as_slice()[..spec.support_start()].iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(leak <= 1e-20);
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layered_circuits_only_carry_rotation_parameters(n in 1usize..=4, depth in 0usize..=4) {
        let circuit = build_layered_circuit(n, depth).unwrap();
        let mut seen = vec![false; circuit.num_params()];
        for gate in circuit.gates() {
            if let Some(p) = gate.param() {
                let rotation = matches!(gate, Gate::Rx { .. } | Gate::Ry { .. });
                prop_assert!(rotation);
                prop_assert!(!seen[p]);
                seen[p] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }
}
