"""Figure rendering for the three CSV kinds.

All renderers are read-only over their input, write one image file, and
produce fixed pixel dimensions for fixed (figsize, dpi). An empty table still
yields a valid image with empty axes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .tables import load_distance, load_generator, load_trajectory  # noqa: E402

DEFAULT_DPI = 100


def _finish(fig, out_path: str, title):
    if title:
        fig.suptitle(title)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def _draw_bloch_sphere(ax) -> None:
    u = np.linspace(0.0, 2.0 * np.pi, 24)
    v = np.linspace(0.0, np.pi, 12)
    x = np.outer(np.cos(u), np.sin(v))
    y = np.outer(np.sin(u), np.sin(v))
    z = np.outer(np.ones_like(u), np.cos(v))
    ax.plot_wireframe(x, y, z, color="0.8", linewidth=0.3)
    ax.set_xlabel("rx")
    ax.set_ylabel("ry")
    ax.set_zlabel("rz")
    ax.set_xlim(-1, 1)
    ax.set_ylim(-1, 1)
    ax.set_zlim(-1, 1)
    ax.set_box_aspect((1, 1, 1))


def render_trajectory(
    csv_path: str,
    out_path: str,
    title=None,
    figsize=(10.0, 4.5),
    dpi: int = DEFAULT_DPI,
) -> str:
    """Two panels: rz against t, and the path on the Bloch sphere.

    One curve per state label in row order of first appearance.
    """
    table = load_trajectory(csv_path)
    fig = plt.figure(figsize=figsize, dpi=dpi)
    flat = fig.add_subplot(1, 2, 1)
    ball = fig.add_subplot(1, 2, 2, projection="3d")
    for label in table.states():
        t, xyz = table.curve(label)
        flat.plot(t, xyz[:, 2], label=label)
        ball.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], label=label)
    flat.set_xlabel("t")
    flat.set_ylabel("rz")
    flat.set_ylim(-1.05, 1.05)
    flat.grid(True, alpha=0.3)
    _draw_bloch_sphere(ball)
    if len(table):
        flat.legend(loc="best")
    return _finish(fig, out_path, title)


def render_distance(
    csv_path: str,
    out_path: str,
    title=None,
    figsize=(7.0, 4.5),
    dpi: int = DEFAULT_DPI,
) -> str:
    """Per-step estimates as markers under the a-priori bound line."""
    table = load_distance(csv_path)
    fig, ax = plt.subplots(figsize=figsize, dpi=dpi)
    if len(table):
        ax.plot(table.j, table.delta_lower, "o-", label="estimated disturbance")
        ax.plot(table.j, table.bound, "--", color="0.4", label="a-priori bound")
    ax.set_xlabel("step j")
    ax.set_ylabel("trace-norm lower bound")
    ax.grid(True, alpha=0.3)
    if len(table):
        ax.legend(loc="best")
    return _finish(fig, out_path, title)


def render_generator(
    csv_path: str,
    out_path: str,
    title=None,
    figsize=(10.0, 4.5),
    dpi: int = DEFAULT_DPI,
) -> str:
    """Numeric coefficient curves (solid) against the printed forms (dashed),
    with the determinant and projection residual on a log panel."""
    table = load_generator(csv_path)
    fig, (left, right) = plt.subplots(1, 2, figsize=figsize, dpi=dpi)
    pairs = (
        ("b", table.b_num, table.b_printed),
        ("c", table.c_num, table.c_printed),
        ("d", table.d_num, table.d_printed),
    )
    for name, num, printed in pairs:
        line = left.plot(table.t, num, label=f"{name} numeric")
        left.plot(table.t, printed, "--", color=line[0].get_color(),
                  label=f"{name} printed")
    left.set_xlabel("t")
    left.set_ylabel("coefficient")
    left.grid(True, alpha=0.3)
    if len(table):
        left.legend(loc="best", fontsize="small")
        right.semilogy(table.t, np.abs(table.det3), label="|det3|")
        positive = table.residual > 0
        right.semilogy(table.t[positive], table.residual[positive],
                       ".", label="residual")
    right.set_xlabel("t")
    right.grid(True, alpha=0.3)
    if len(table):
        right.legend(loc="best", fontsize="small")
    return _finish(fig, out_path, title)
