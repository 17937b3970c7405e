#!/usr/bin/env python3
"""Reference values for the test suite, computed independently of the C++ code.

Dense scipy/numpy linear algebra on the composite space. Thermodynamic
derivatives come from spectral moments (no finite differences), the mean-force
Hamiltonian from scipy.linalg.logm, classical values from Gaussian algebra and
scipy.integrate.quad. Run from the repository root:

    python3 tests/oracle/generate_golden.py
"""

import json
import os

import numpy as np
from scipy import integrate, linalg

OUT = os.path.join(os.path.dirname(__file__), "..", "golden")


def qubit(omega):
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return 0.5 * omega * sz, sx


def oscillator(omega, d):
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    n = a.T @ a
    return omega * (n + 0.5 * np.eye(d)), (a + a.T) / np.sqrt(2.0)


def model(kind, g, omega_s=1.0, omega_b=1.0, d=12, J=0.0):
    if kind == "two-qubit":
        hs, xs = qubit(omega_s)
        hb, xb = qubit(omega_b)
    elif kind == "coupled-oscillators":
        hs, xs = oscillator(omega_s, d)
        hb, xb = oscillator(omega_b, d)
    else:
        hs, xs = qubit(omega_s)
        hb, xb = oscillator(omega_b, d)
    ds, db = hs.shape[0], hb.shape[0]
    m = dict(ds=ds, db=db, hs=hs, hb=hb, ab=xb, J=J)
    m["Hs"] = np.kron(hs, np.eye(db))
    m["Hb"] = np.kron(np.eye(ds), hb)
    m["Ab"] = np.kron(np.eye(ds), xb)
    m["Hi"] = g * np.kron(xs, xb)
    m["Hc"] = m["Hs"] + m["Hi"] + m["Hb"] + J * m["Ab"]
    m["Hfree"] = hb + J * xb
    return m


def ptrace_bath(x, ds, db):
    return np.einsum("ibjb->ij", x.reshape(ds, db, ds, db))


def ptrace_sys(x, ds, db):
    return np.einsum("aiaj->ij", x.reshape(ds, db, ds, db))


def gibbs(h, beta):
    e, v = linalg.eigh(h)
    w = np.exp(-beta * (e - e.min()))
    z = w.sum()
    p = w / z
    log_z = np.log(z) - beta * e.min()
    rho = (v * p) @ v.T
    u = p @ e
    var = p @ (e - u) ** 2
    ent = -np.sum(p[p > 0] * np.log(p[p > 0]))
    return dict(rho=rho, log_z=log_z, U=u, var=var, S=ent)


def entropy(rho):
    p = linalg.eigvalsh(rho)
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def quantum_point(kind, g, beta, **kw):
    m = model(kind, g, **kw)
    ds, db = m["ds"], m["db"]
    c = gibbs(m["Hc"], beta)
    b = gibbs(m["Hfree"], beta)
    rho_s = ptrace_bath(c["rho"], ds, db)
    rho_bp = ptrace_sys(c["rho"], ds, db)
    boltz = linalg.expm(-beta * m["Hc"])
    hstar = -linalg.logm(ptrace_bath(boltz, ds, db) / np.exp(b["log_z"])).real / beta
    hstar = 0.5 * (hstar + hstar.T)
    log_z_star = float(np.log(np.trace(linalg.expm(-beta * hstar))))
    s_vn = entropy(rho_s)
    exp_c = lambda x: float(np.trace(c["rho"] @ x))
    exp_b = lambda x: float(np.trace(b["rho"] @ x))
    hc = m["Hc"]
    # d_beta <X>_c = -(<X H_c> - <X><H_c>) for any X.
    cov_hs = exp_c(m["Hs"] @ hc) - exp_c(m["Hs"]) * exp_c(hc)
    u_gt = exp_c(m["Hs"])
    out = dict(
        log_Z_c=c["log_z"],
        log_Z_b=b["log_z"],
        log_Z_star=log_z_star,
        F_star=-log_z_star / beta,
        U_s_gt=u_gt,
        S_vN=s_vn,
        S_s=c["S"] - b["S"],
        U_s_pm=c["U"] - b["U"],
        C_s_pm=beta**2 * (c["var"] - b["var"]),
        C_s_gt=beta**2 * cov_hs,
        S_c=c["S"],
        S_b=b["S"],
        S_b_prime=entropy(rho_bp),
        I_sb=s_vn + entropy(rho_bp) - c["S"],
        h_star_eigenvalues=list(linalg.eigvalsh(hstar)),
        rho_s_eigenvalues=list(linalg.eigvalsh(rho_s)),
    )
    if m["J"] != 0.0:
        J = m["J"]
        a_c = exp_c(m["Ab"])
        a_b = exp_b(m["ab"])
        h_c = c["U"]
        h_b = b["U"]
        u_c = h_c - J * a_c
        u_b = exp_b(m["hb"])
        g_s = -(c["log_z"] - b["log_z"]) / beta
        out.update(
            A_c=a_c,
            A_b=a_b,
            A_s=a_c - a_b,
            H_s=h_c - h_b,
            U_s=u_c - u_b,
            G_s=g_s,
            S_s_jz=beta * (h_c - h_b - g_s),
            naive_difference=exp_c(m["Hs"] + m["Hi"]) - (h_c - h_b),
            A_s_bare=float(np.trace(rho_s @ (hstar - m["hs"]))) / J,
        )
    return out


def classical(lam, g=0.5, P=1.0, beta=1.0, omega_s=1.0, omega_b=1.0, kappa=1.0, a=1.0, v0=1.0):
    # phi(q) = -q^2 (g^2/(2 w^2) + lam^2/(2 kappa)) - lam P a q / kappa
    soft = g * g / (2 * omega_b**2) + lam * lam / (2 * kappa)
    phi = lambda q: -soft * q * q - lam * P * a * q / kappa
    dphi = lambda q: -lam * a * q / kappa
    weight = lambda q: np.exp(-beta * (0.5 * omega_s**2 * q * q + phi(q)))
    lim = 40.0
    zq = integrate.quad(weight, -lim, lim, epsabs=0, epsrel=1e-13, limit=200)[0]
    mean = lambda f: integrate.quad(lambda q: f(q) * weight(q), -lim, lim, epsabs=1e-15, epsrel=1e-13,
                                    limit=200)[0] / zq
    log_z_s = 0.5 * np.log(2 * np.pi / beta) + np.log(zq)
    g_s = -log_z_s / beta
    q2 = mean(lambda q: q * q)
    u_bare = 0.5 / beta + 0.5 * omega_s**2 * q2
    mphi = mean(phi)
    v_bare = mphi / P
    h_bare = u_bare + mphi
    s_bare = beta * (h_bare - g_s)

    # Composite and free bath as Gaussians over (q, q1, v) and (q1, v).
    K = np.array([[omega_s**2, g, lam], [g, omega_b**2, 0.0], [lam, 0.0, kappa]])
    l = np.array([0.0, 0.0, P * a])

    def gauss(k, lin, nmom):
        mu = -linalg.solve(k, lin)
        cov = linalg.inv(k) / beta
        n = k.shape[0]
        log_z = (n + nmom) / 2 * np.log(2 * np.pi / beta) - 0.5 * np.log(linalg.det(k)) - 0.5 * beta * lin @ mu
        log_z -= beta * P * v0
        energy = (n + nmom) / (2 * beta) + 0.5 * np.trace(k @ cov) + 0.5 * mu @ k @ mu - n / (2 * beta)
        return log_z, energy, v0 + a * mu[-1]

    lzc, uc, vc = gauss(K, l, 3)
    lzb, ub, vb = gauss(K[1:, 1:], l[1:], 2)
    gc, gb = -lzc / beta, -lzb / beta
    hc, hb = uc + P * vc, ub + P * vb
    sc, sb = beta * (hc - gc), beta * (hb - gb)
    v_pm = mean(dphi)
    return dict(
        G_s=g_s,
        G_s_gauss=gc - gb,
        V_bare=v_bare,
        U_bare=u_bare,
        H_bare=h_bare,
        S_bare=s_bare,
        V_pm=v_pm,
        V_pm_split=vc - vb,
        U_pm=uc - ub,
        H_pm=hc - hb,
        S_pm=sc - sb,
        S_c=sc,
        S_b=sb,
        gap_V=abs(v_bare - v_pm),
        gap_U=abs(u_bare - (uc - ub)),
        gap_S=abs(s_bare - (sc - sb)),
    )


def main():
    os.makedirs(OUT, exist_ok=True)
    golden = {}
    golden["two_qubit_g0.5_beta1"] = quantum_point("two-qubit", 0.5, 1.0)
    golden["oscillators_g0.5_beta1"] = quantum_point("coupled-oscillators", 0.5, 1.0, omega_b=2.0)
    golden["spin_boson_g0.5_beta1"] = quantum_point("spin-boson", 0.5, 1.0, omega_b=1.0)
    golden["jz_two_qubit_J0.3_g0.5_beta1"] = quantum_point("two-qubit", 0.5, 1.0, J=0.3)
    golden["jz_oscillators_J0.3_g0.5_beta1"] = quantum_point("coupled-oscillators", 0.5, 1.0, omega_b=2.0, J=0.3)

    low_t = {}
    for beta in (10.0, 15.0, 20.0, 25.0, 30.0):
        p = quantum_point("coupled-oscillators", 1.0, beta, omega_b=2.0)
        low_t[f"{beta:g}"] = dict(S_vN=p["S_vN"], S_s=p["S_s"], C_s_pm=p["C_s_pm"], C_s_gt=p["C_s_gt"])
    golden["low_temperature_oscillators_g1"] = low_t

    weak = {}
    for g in (1e-3, 5e-4):
        p = quantum_point("two-qubit", g, 1.0)
        weak[f"{g:g}"] = dict(U_gap=p["U_s_pm"] - p["U_s_gt"], S_gap=p["S_vN"] - p["S_s"])
    golden["weak_coupling_two_qubit_beta1"] = weak

    negative = {}
    for beta in (1.5, 2.5, 3.5):
        p = quantum_point("two-qubit", 1.0, beta)
        negative[f"{beta:g}"] = dict(C_s_pm=p["C_s_pm"], C_s_gt=p["C_s_gt"])
    golden["heat_capacity_two_qubit_g1"] = negative

    golden["classical_lambda0.4_P1_beta1"] = classical(0.4)
    golden["classical_lambda0_P1_beta1"] = classical(0.0)

    with open(os.path.join(OUT, "oracle.json"), "w") as f:
        json.dump(golden, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
