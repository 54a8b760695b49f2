"""Full 12-DoF rigid-body model of the thruster-assisted biped.

Five point masses (body, two hip motors, two knee motors) hang on massless
links; the body attitude lives on SO(3). Generalized velocity is

    v = [omega_B (body frame, 3), pdot_B (3), dgamma_L, dgamma_R,
         dphi_hL, dphi_hR]                                       (10)

and the acceleration vector appends the two knee sagittal coordinates,
which carry no mass and are driven directly by their acceleration inputs:

    a = [domega_B, pddot_B, ddgamma_L, ddgamma_R, ddphi_hL, ddphi_hR,
         ddphi_kL, ddphi_kR]                                     (12)

Joint input u_j = [u_PL, u_PR, u_HL, u_HR, u_kL, u_kR] acts on the last six
rows; thruster and ground forces enter through point-velocity Jacobians.

Equations of motion are assembled in projected Newton-Euler form (Kane),
which coincides with the Euler-Poincare equations for this choice of
quasi-velocities; the energy-conservation tests pin the consistency of the
mass matrix, bias vector and energy functions against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import (
    dexpinv,
    is_rotation,
    orthonormalize,
    rot_x,
    rot_y,
    rk4_step,
    skew,
    so3_exp,
    solve_linear,
)

NV = 10  # massive generalized velocities
NA = 12  # accelerations incl. massless knee coordinates

_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])


def _mirror_y(vec: np.ndarray) -> np.ndarray:
    return vec * np.array([1.0, -1.0, 1.0])


@dataclass
class RobotParams:
    """Geometry, masses and inertias. Link vectors are left-side values in
    their local frames; the right side mirrors the y component."""

    l1: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.1, -0.1]))
    l2: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.05, 0.0]))
    l3: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -0.3]))
    l4a: float = 0.1
    l4b: float = 0.3
    lt: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.25, 0.0]))
    m_B: float = 2.0
    m_H: float = 0.5
    m_K: float = 0.5
    I_B: np.ndarray = field(default_factory=lambda: 1e-3 * np.eye(3))
    I_H: np.ndarray = field(default_factory=lambda: 1e-4 * np.eye(3))
    I_K: np.ndarray = field(default_factory=lambda: 1e-4 * np.eye(3))
    g: float = 9.81

    def __post_init__(self):
        for name in ("l1", "l2", "l3", "lt"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("I_B", "I_H", "I_K"):
            I = np.asarray(getattr(self, name), dtype=float)
            if I.shape == ():
                I = float(I) * np.eye(3)
            setattr(self, name, I)
        self.validate()
        # per-side constants, index 0 = left, 1 = right
        self._l1s = np.stack([self.l1, _mirror_y(self.l1)])
        self._l2s = np.stack([self.l2, _mirror_y(self.l2)])
        self._l3s = np.stack([self.l3, _mirror_y(self.l3)])
        self._lts = np.stack([self.lt, _mirror_y(self.lt)])
        self._m5 = np.array([self.m_B, self.m_H, self.m_H, self.m_K, self.m_K])
        self._I5 = np.stack([self.I_B, self.I_H, self.I_H, self.I_K, self.I_K])

    def validate(self):
        if min(self.m_B, self.m_H, self.m_K) <= 0.0:
            raise ValueError("masses must be positive")
        for name in ("I_B", "I_H", "I_K"):
            I = getattr(self, name)
            if not np.allclose(I, I.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.min(np.linalg.eigvalsh(I)) <= 0.0:
                raise ValueError(f"{name} must be positive definite")
        if self.l3[2] >= 0.0:
            raise ValueError("l3 must point below the hip (negative z)")
        if self.l4a < 0.0 or self.l4b <= 0.0:
            raise ValueError("lower-leg linkage lengths must be positive")

    @property
    def total_mass(self) -> float:
        return self.m_B + 2.0 * self.m_H + 2.0 * self.m_K


@dataclass
class RobotState:
    """Full model state. q and dq order: [gamma_L, gamma_R, phi_hL, phi_hR,
    phi_kL, phi_kR]."""

    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: np.ndarray = field(default_factory=lambda: np.zeros(6))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dq: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        for name in ("p", "omega", "v"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        for name in ("q", "dq"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(6))

    def copy(self) -> "RobotState":
        return RobotState(self.R.copy(), self.p.copy(), self.q.copy(),
                          self.omega.copy(), self.v.copy(), self.dq.copy())

    def validate(self, tol: float = 1e-9):
        if not is_rotation(self.R, tol):
            raise ValueError("R is not a rotation matrix")
        for name in ("p", "q", "omega", "v", "dq"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")

    def vel10(self) -> np.ndarray:
        return np.concatenate([self.omega, self.v, self.dq[:4]])


@dataclass
class KinematicFrames:
    """World-frame chain points per leg (row 0 left, row 1 right) plus the
    hip/knee angular velocities in their own frames and foot velocities."""

    p_P: np.ndarray
    p_H: np.ndarray
    p_K: np.ndarray
    p_F: np.ndarray
    p_T: np.ndarray
    omega_H: np.ndarray
    omega_K: np.ndarray
    v_F: np.ndarray


class _Chain:
    """Body-frame kinematic quantities shared by every assembly routine."""

    __slots__ = (
        "Ag", "Ah", "ay", "cP", "cH", "cK", "cF", "cT",
        "kh", "kK", "cdH", "cdK", "cdF", "cddH", "cddK", "gkp",
        "cg", "sg", "ch", "sh",
    )

    def __init__(self, params: RobotParams, q: np.ndarray, dq: np.ndarray):
        gam, phih, phik = q[0:2], q[2:4], q[4:6]
        dgam, dphih, dphik = dq[0:2], dq[2:4], dq[4:6]
        cg, sg = np.cos(gam), np.sin(gam)
        ch, sh = np.cos(phih), np.sin(phih)
        ck, sk = np.cos(phik), np.sin(phik)
        self.cg, self.sg, self.ch, self.sh = cg, sg, ch, sh

        Ag = np.zeros((2, 3, 3))
        Ag[:, 0, 0] = 1.0
        Ag[:, 1, 1] = cg
        Ag[:, 1, 2] = -sg
        Ag[:, 2, 1] = sg
        Ag[:, 2, 2] = cg
        Ry = np.zeros((2, 3, 3))
        Ry[:, 0, 0] = ch
        Ry[:, 0, 2] = sh
        Ry[:, 1, 1] = 1.0
        Ry[:, 2, 0] = -sh
        Ry[:, 2, 2] = ch
        Ah = Ag @ Ry
        self.Ag, self.Ah = Ag, Ah
        self.ay = Ag[:, :, 1]

        self.cP = params._l1s
        self.cH = self.cP + np.einsum("sij,sj->si", Ag, params._l2s)
        self.cK = self.cH + np.einsum("sij,sj->si", Ah, params._l3s)
        gk = np.stack(
            [-params.l4a - params.l4b * sk, np.zeros(2), -params.l4b * ck], axis=1
        )
        self.cF = self.cK + np.einsum("sij,sj->si", Ah, gk)
        self.cT = params._lts

        # chain angular velocities relative to the body, body frame
        self.kh = dgam[:, None] * _EX
        self.kK = self.kh + dphih[:, None] * self.ay
        self.cdH = np.cross(self.kh, self.cH - self.cP)
        self.cdK = self.cdH + np.cross(self.kK, self.cK - self.cH)
        self.gkp = np.stack(
            [-params.l4b * ck, np.zeros(2), params.l4b * sk], axis=1
        )
        self.cdF = (
            self.cdK
            + np.cross(self.kK, self.cF - self.cK)
            + dphik[:, None] * np.einsum("sij,sj->si", Ah, self.gkp)
        )
        # zero-acceleration (bias) second derivatives of the mass points
        self.cddH = np.cross(self.kh, self.cdH)
        kKd = dphih[:, None] * np.cross(self.kh, self.ay)
        self.cddK = (
            self.cddH
            + np.cross(kKd, self.cK - self.cH)
            + np.cross(self.kK, self.cdK - self.cdH)
        )


def forward_kinematics(params: RobotParams, state: RobotState) -> KinematicFrames:
    """World positions of pelvis, hip, knee, foot and thruster points."""
    ch = _Chain(params, state.q, state.dq)
    R, p = state.R, state.p

    def world(c):
        return p + c @ R.T

    omega = state.omega
    om_H = np.einsum("sji,j->si", ch.Ag, omega) + state.dq[0:2, None] * _EX
    # knee chain rate in its own frame: W columns evaluated directly
    ry_t_ex = np.stack([ch.ch, np.zeros(2), ch.sh], axis=1)
    om_K = (
        np.einsum("sji,j->si", ch.Ah, omega)
        + state.dq[0:2, None] * ry_t_ex
        + state.dq[2:4, None] * _EY
    )
    v_F = state.v + (np.cross(omega, ch.cF) + ch.cdF) @ R.T
    return KinematicFrames(
        p_P=world(ch.cP),
        p_H=world(ch.cH),
        p_K=world(ch.cK),
        p_F=world(ch.cF),
        p_T=world(ch.cT),
        omega_H=om_H,
        omega_K=om_K,
        v_F=v_F,
    )


class _Assembly:
    """Mass matrix, bias vector, input maps and contact kinematics at one
    state. All public operations are thin views over this."""

    __slots__ = ("M10", "h10", "Bt", "Bg", "p_F", "v_F", "chain")

    def __init__(self, params: RobotParams, state: RobotState):
        ch = _Chain(params, state.q, state.dq)
        self.chain = ch
        R, p = state.R, state.p
        omega, pdot = state.omega, state.v
        dgam, dphih = state.dq[0:2], state.dq[2:4]

        # translational Jacobians of the five mass points, world frame
        J = np.zeros((5, 3, NV))
        bodies = [
            (0, np.zeros(3), None, None),
            (1, ch.cH[0], 0, None),
            (2, ch.cH[1], 1, None),
            (3, ch.cK[0], 0, 0),
            (4, ch.cK[1], 1, 1),
        ]
        for idx, c, side, hip_side in bodies:
            if idx > 0:
                J[idx, :, 0:3] = -R @ skew(c)
            J[idx, :, 3:6] = np.eye(3)
            if side is not None:
                J[idx, :, 6 + side] = R @ np.cross(_EX, c - ch.cP[side])
            if hip_side is not None:
                J[idx, :, 8 + hip_side] = R @ np.cross(
                    ch.ay[hip_side], c - ch.cH[hip_side]
                )

        # rotational Jacobians in each rotor's own frame
        W = np.zeros((5, 3, NV))
        W[0, :, 0:3] = np.eye(3)
        ry_t_ex = np.stack([ch.ch, np.zeros(2), ch.sh], axis=1)
        for s in range(2):
            W[1 + s, :, 0:3] = ch.Ag[s].T
            W[1 + s, :, 6 + s] = _EX
            W[3 + s, :, 0:3] = ch.Ah[s].T
            W[3 + s, :, 6 + s] = ry_t_ex[s]
            W[3 + s, :, 8 + s] = _EY

        m5, I5 = params._m5, params._I5
        M10 = np.einsum("aij,a,aik->jk", J, m5, J)
        IW = np.einsum("aij,ajk->aik", I5, W)
        M10 += np.einsum("aij,aik->jk", W, IW)
        self.M10 = 0.5 * (M10 + M10.T)

        # bias accelerations of the mass points (world frame, a = 0)
        c5 = np.stack([np.zeros(3), ch.cH[0], ch.cH[1], ch.cK[0], ch.cK[1]])
        cd5 = np.stack([np.zeros(3), ch.cdH[0], ch.cdH[1], ch.cdK[0], ch.cdK[1]])
        cdd5 = np.stack([np.zeros(3), ch.cddH[0], ch.cddH[1], ch.cddK[0], ch.cddK[1]])
        acc_b = (
            np.cross(omega, np.cross(omega, c5))
            + 2.0 * np.cross(omega, cd5)
            + cdd5
        ) @ R.T

        g_vec = np.array([0.0, 0.0, -params.g])
        h10 = np.einsum("aij,ai->j", J, m5[:, None] * (acc_b - g_vec))

        # Euler terms of the rotors
        om_loc = np.einsum("aij,j->ai", W, np.concatenate([omega, pdot, dgam, dphih]))
        omd_b = np.zeros((5, 3))
        for s in range(2):
            omd_b[1 + s] = -ch.Ag[s].T @ (dgam[s] * np.cross(_EX, omega))
            ry_t_ez = np.array([-ch.sh[s], 0.0, ch.ch[s]])
            omd_b[3 + s] = -ch.Ah[s].T @ np.cross(ch.kK[s], omega) + (
                dgam[s] * dphih[s]
            ) * ry_t_ez
        Iom = np.einsum("aij,aj->ai", I5, om_loc)
        tau = np.einsum("aij,aj->ai", I5, omd_b) + np.cross(om_loc, Iom)
        h10 += np.einsum("aij,ai->j", W, tau)
        self.h10 = h10

        # thruster and foot point Jacobians -> input maps (12 x 6)
        def point_jac(c, side, with_joints):
            Jp = np.zeros((3, NV))
            Jp[:, 0:3] = -R @ skew(c)
            Jp[:, 3:6] = np.eye(3)
            if with_joints:
                Jp[:, 6 + side] = R @ np.cross(_EX, c - ch.cP[side])
                Jp[:, 8 + side] = R @ np.cross(ch.ay[side], c - ch.cH[side])
            return Jp

        Bt = np.zeros((NA, 6))
        Bg = np.zeros((NA, 6))
        for s in range(2):
            Bt[:NV, 3 * s : 3 * s + 3] = point_jac(ch.cT[s], s, False).T
            Bg[:NV, 3 * s : 3 * s + 3] = point_jac(ch.cF[s], s, True).T
        self.Bt, self.Bg = Bt, Bg

        self.p_F = p + ch.cF @ R.T
        self.v_F = pdot + (np.cross(omega, ch.cF) + ch.cdF) @ R.T


def mass_matrix(params: RobotParams, state: RobotState) -> np.ndarray:
    """12x12 generalized mass matrix; knee rows/columns are identity."""
    asm = _Assembly(params, state)
    M = np.eye(NA)
    M[:NV, :NV] = asm.M10
    return M


def bias_forces(params: RobotParams, state: RobotState) -> np.ndarray:
    """Coriolis/centrifugal, gyroscopic and gravity terms; knee rows zero."""
    asm = _Assembly(params, state)
    h = np.zeros(NA)
    h[:NV] = asm.h10
    return h


def thruster_map(params: RobotParams, state: RobotState) -> np.ndarray:
    return _Assembly(params, state).Bt.copy()


def contact_map(params: RobotParams, state: RobotState) -> np.ndarray:
    return _Assembly(params, state).Bg.copy()


def joint_map() -> np.ndarray:
    B = np.zeros((NA, 6))
    B[6:, :] = np.eye(6)
    return B


def _accel(params, asm: _Assembly, u_j, u_t, u_g) -> np.ndarray:
    rhs = np.zeros(NA)
    rhs[:NV] = asm.Bt[:NV] @ u_t + asm.Bg[:NV] @ u_g - asm.h10
    rhs[6:] += u_j
    M = np.eye(NA)
    M[:NV, :NV] = asm.M10
    return solve_linear(M, rhs)


def forward_dynamics(params: RobotParams, state: RobotState,
                     u_j, u_t, u_g) -> np.ndarray:
    """Generalized acceleration a = M^-1 (B_j u_j + B_t u_t + B_g u_g - h)."""
    u_j = np.asarray(u_j, dtype=float).reshape(6)
    u_t = np.asarray(u_t, dtype=float).reshape(6)
    u_g = np.asarray(u_g, dtype=float).reshape(6)
    return _accel(params, _Assembly(params, state), u_j, u_t, u_g)


@dataclass
class StateDerivative:
    """Time derivative of RobotState; dR is reported as the body rate (the
    rotation itself is propagated on the manifold by the integrator)."""

    omega_body: np.ndarray
    dp: np.ndarray
    dq: np.ndarray
    domega: np.ndarray
    dv: np.ndarray
    ddq: np.ndarray


def state_derivative(params: RobotParams, state: RobotState,
                     u_j, u_t, u_g) -> StateDerivative:
    a = forward_dynamics(params, state, u_j, u_t, u_g)
    return StateDerivative(
        omega_body=state.omega.copy(),
        dp=state.v.copy(),
        dq=state.dq.copy(),
        domega=a[0:3],
        dv=a[3:6],
        ddq=a[6:12],
    )


def kinetic_energy(params: RobotParams, state: RobotState) -> float:
    v10 = state.vel10()
    return 0.5 * float(v10 @ _Assembly(params, state).M10 @ v10)


def potential_energy(params: RobotParams, state: RobotState) -> float:
    fr = forward_kinematics(params, state)
    z = (
        params.m_B * state.p[2]
        + params.m_H * (fr.p_H[0, 2] + fr.p_H[1, 2])
        + params.m_K * (fr.p_K[0, 2] + fr.p_K[1, 2])
    )
    return params.g * z


def total_energy(params: RobotParams, state: RobotState) -> float:
    return kinetic_energy(params, state) + potential_energy(params, state)


def com_position(params: RobotParams, state: RobotState) -> np.ndarray:
    fr = forward_kinematics(params, state)
    acc = params.m_B * state.p
    acc = acc + params.m_H * (fr.p_H[0] + fr.p_H[1])
    acc = acc + params.m_K * (fr.p_K[0] + fr.p_K[1])
    return acc / params.total_mass


def integrate_substep(params: RobotParams, state: RobotState, u_j, u_t,
                      dt: float, ground_fn=None, t: float = 0.0) -> RobotState:
    """One fixed RK4 step with held joint/thruster inputs.

    The rotation is advanced through the exponential chart anchored at the
    step's initial attitude (body rate mapped by dexpinv per stage), so the
    update stays on SO(3) to round-off and keeps the integrator 4th order.
    Ground forces, when a ground_fn(p_feet, v_feet) -> (2,3) is supplied,
    are re-evaluated at every stage: contact is state feedback, not input.
    """
    u_j = np.asarray(u_j, dtype=float).reshape(6)
    u_t = np.asarray(u_t, dtype=float).reshape(6)
    R0 = state.R

    def f(z, _t):
        st = RobotState(
            R=R0 @ so3_exp(z[0:3]), p=z[3:6], q=z[6:12],
            omega=z[12:15], v=z[15:18], dq=z[18:24],
        )
        asm = _Assembly(params, st)
        if ground_fn is None:
            u_g = np.zeros(6)
        else:
            u_g = np.asarray(ground_fn(asm.p_F, asm.v_F), dtype=float).reshape(6)
        a = _accel(params, asm, u_j, u_t, u_g)
        return np.concatenate([dexpinv(z[0:3], z[12:15]), z[15:18], z[18:24], a])

    z0 = np.concatenate([np.zeros(3), state.p, state.q, state.omega, state.v, state.dq])
    z1 = rk4_step(f, z0, t, dt)
    return RobotState(
        R=orthonormalize(R0 @ so3_exp(z1[0:3])),
        p=z1[3:6], q=z1[6:12], omega=z1[12:15], v=z1[15:18], dq=z1[18:24],
    )


def mirror_state(state: RobotState) -> RobotState:
    """Reflect a state across the x-z plane, swapping the legs."""
    S = np.diag([1.0, -1.0, 1.0])
    swap = [1, 0, 3, 2, 5, 4]
    q = state.q[swap].copy()
    dq = state.dq[swap].copy()
    q[0:2] *= -1.0  # frontal hip angles flip sign
    dq[0:2] *= -1.0
    # angular velocity is a pseudovector: x and z components flip
    om = np.array([-state.omega[0], state.omega[1], -state.omega[2]])
    return RobotState(
        R=S @ state.R @ S,
        p=S @ state.p,
        q=q,
        omega=om,
        v=S @ state.v,
        dq=dq,
    )
