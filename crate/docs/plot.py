"""Plots the CSV files written by `ncgvf run`/`demo` and `ncgvf field`.

    python docs/plot.py out/sim1.csv          # trajectories, V and edge errors
    python docs/plot.py field.csv --field     # quiver of the sampled field

Needs pandas and matplotlib.
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def trajectories(path):
    df = pd.read_csv(path)
    edges = pd.read_csv(path.replace(".csv", "_edges.csv"))
    dim = sum(c.startswith("xI_") for c in df.columns)
    fig = plt.figure(figsize=(12, 4))
    ax = fig.add_subplot(131, projection="3d" if dim == 3 else None)
    for agent, g in df.groupby("agent"):
        ax.plot(*(g[f"xI_{i}"] for i in range(1, dim + 1)), label=f"agent {agent}")
    ax.legend()
    ax = fig.add_subplot(132)
    for agent, g in df.groupby("agent"):
        ax.semilogy(g["t"], g["phi_norm"], label=f"agent {agent}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("|phi|")
    ax = fig.add_subplot(133)
    for (i, j), g in edges.groupby(["i", "j"]):
        ax.plot(g["t"], g["theta_error"], label=f"({i}, {j})")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("theta error [rad]")
    ax.legend()
    plt.tight_layout()
    plt.show()


def field(path):
    df = pd.read_csv(path)
    df = df[df["singular"] == 0]
    for theta, g in df.groupby("theta"):
        plt.figure()
        plt.quiver(g["x"], g["y"], g["u_x"], g["u_y"], g["norm"])
        plt.title(f"theta = {theta}")
        plt.axis("equal")
    plt.show()


if __name__ == "__main__":
    (field if "--field" in sys.argv else trajectories)(sys.argv[1])
