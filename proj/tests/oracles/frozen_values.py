"""Independent numpy computation of the frozen values used by the C++ tests.

Run: python3 tests/oracles/frozen_values.py
"""
import itertools
import numpy as np

np.set_printoptions(precision=17)


def reference_instance(p=(0.3, 0.7), T=3):
    A = np.diag([1.2, 0.8])
    B = np.array([[0.5, 1.0, 0.0], [1.0, 0.0, 0.7]])
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    M = np.array([[0.1, 0.2, 0.0], [0.0, 0.0, 0.1]])
    R = np.array([[1.0, 0.1, 0.1], [0.1, 0.5, 0.0], [0.1, 0.0, 0.8]])
    QT = np.array([[1.0, 0.2], [0.2, 1.5]])
    Sx = np.diag([1.0, 2.0])
    Sw = np.diag([0.5, 0.3])
    return dict(A=A, B=B, Q=Q, M=M, R=R, QT=QT, Sx=Sx, Sw=Sw, p=np.array(p), T=T)


def lqr_step(P, A, B, Q, M, R):
    D = R + B.T @ P @ B
    C = M + A.T @ P @ B
    K = np.linalg.solve(D, C.T)
    return Q + A.T @ P @ A - C @ K, K


def synthesize(s):
    T = s["T"]
    P = [None] * (T + 1)
    K = [None] * T
    P[T] = s["QT"]
    for t in range(T - 1, -1, -1):
        P[t], K[t] = lqr_step(P[t + 1], s["A"], s["B"], s["Q"], s["M"], s["R"])
    Pt = [[None] * (T + 1) for _ in range(2)]
    Pi = [[None] * (T + 1) for _ in range(2)]
    Kt = [[None] * T for _ in range(2)]
    for i in range(2):
        a = s["A"][i:i + 1, i:i + 1]
        b = s["B"][i:i + 1, 1 + i:2 + i]
        q = s["Q"][i:i + 1, i:i + 1]
        m = s["M"][i:i + 1, 1 + i:2 + i]
        r = s["R"][1 + i:2 + i, 1 + i:2 + i]
        Pt[i][T] = s["QT"][i:i + 1, i:i + 1]
        for t in range(T - 1, -1, -1):
            Pi[i][t + 1] = (1 - s["p"][i]) * P[t + 1][i:i + 1, i:i + 1] + s["p"][i] * Pt[i][t + 1]
            Pt[i][t], Kt[i][t] = lqr_step(Pi[i][t + 1], a, b, q, m, r)
    return P, K, Pt, Pi, Kt


def closed_form(s, P, Pt, Pi):
    J = 0.0
    for i in range(2):
        p = s["p"][i]
        J += (1 - p) * P[0][i, i] * s["Sx"][i, i] + p * Pt[i][0][0, 0] * s["Sx"][i, i]
        for t in range(s["T"]):
            J += Pi[i][t + 1][0, 0] * s["Sw"][i, i]
    return J


def enumerate_cost(s, K, Kt):
    """Exact expected cost by brute-force enumeration of all channel sequences,
    propagating the covariance of (x, xhat) for each sequence separately."""
    T, A, B = s["T"], s["A"], s["B"]
    total = 0.0
    prob_sum = 0.0
    W = np.block([[s["Q"], s["M"]], [s["M"].T, s["R"]]])
    for bits in itertools.product([0, 1], repeat=2 * (T + 1)):
        g = np.array(bits).reshape(T + 1, 2)
        prob = 1.0
        for t in range(T + 1):
            for i in range(2):
                prob *= (1 - s["p"][i]) if g[t, i] else s["p"][i]
        if prob == 0:
            continue
        D0 = np.diag(g[0])
        G = np.vstack([np.eye(2), D0])
        S = G @ s["Sx"] @ G.T
        cost = 0.0
        for t in range(T):
            L = np.zeros((3, 2))
            L[1, 0] = Kt[0][t][0, 0]
            L[2, 1] = Kt[1][t][0, 0]
            Fu = np.hstack([-L, L - K[t]])
            H = np.vstack([np.hstack([np.eye(2), np.zeros((2, 2))]), Fu])
            cost += np.trace(H.T @ W @ H @ S)
            Fx = np.hstack([A, np.zeros((2, 2))]) + B @ Fu
            Fp = np.hstack([np.zeros((2, 2)), A - B @ K[t]])
            D = np.diag(g[t + 1])
            F = np.vstack([Fx, D @ Fx + (np.eye(2) - D) @ Fp])
            G = np.vstack([np.eye(2), D])
            S = F @ S @ F.T + G @ s["Sw"] @ G.T
        cost += np.trace(s["QT"] @ S[:2, :2])
        total += prob * cost
        prob_sum += prob
    return total, prob_sum


def grid_min_scalar():
    # u -> x^2 + u^2 + (x + u)^2 at x = 1
    u = np.linspace(-2, 2, 400001)
    v = 1 + u ** 2 + (1 + u) ** 2
    k = np.argmin(v)
    return v[k], u[k]


if __name__ == "__main__":
    print("grid min scalar (value, argmin):", grid_min_scalar())
    print("eigenvalues [[1,2],[2,1]]:", np.linalg.eigvalsh(np.array([[1.0, 2.0], [2.0, 1.0]])))
    s = reference_instance()
    P, K, Pt, Pi, Kt = synthesize(s)
    print("J* reference:", repr(closed_form(s, P, Pt, Pi)))
    print("enumerated optimal:", enumerate_cost(s, K, Kt))
    Z = [np.zeros((3, 2))] * s["T"]
    Zt = [[np.zeros((1, 1))] * s["T"] for _ in range(2)]
    print("enumerated zero strategy:", enumerate_cost(s, Z, Zt))
    print("K_0:", K[0].tolist())
    print("K_tilde_0:", Kt[0][0][0, 0], Kt[1][0][0, 0])
    s0 = reference_instance(p=(0.0, 0.0))
    P0, K0, Pt0, Pi0, _ = synthesize(s0)
    print("J* p=0:", repr(closed_form(s0, P0, Pt0, Pi0)),
          "centralized:", repr(np.trace(P0[0] @ s0["Sx"]) + sum(np.trace(P0[t + 1] @ s0["Sw"]) for t in range(s0["T"]))))
    sweep = []
    for p1 in np.linspace(0.0, 1.0, 11):
        si = reference_instance(p=(p1, 0.7))
        Pi_, _, Pti, Pii, _ = synthesize(si)
        sweep.append(closed_form(si, Pi_, Pti, Pii))
    print("J* over p1 grid (p2 = 0.7):", [repr(v) for v in sweep])
    print("nondecreasing:", all(b >= a for a, b in zip(sweep, sweep[1:])))
