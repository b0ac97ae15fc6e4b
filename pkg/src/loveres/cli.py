"""Batch command-line front end.

One run = one JSON config (flags override individual keys; flags win), one
output directory.  Every run writes a manifest listing the resolved config,
its hash, and a content hash of every artifact, so identical config + inputs
give byte-identical outputs.

Exit codes: 0 success, 2 config error, 3 numerical failure (message carries
the failing stage), 4 scattering-class violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import (ClassViolationError, ConfigError, LoveResError,
                     StageError)
from .jost import JostEvaluator
from .profile import (PotentialProfile, calibrate, load_potential,
                      load_shear_profile, save_potential, save_shear_profile)
from .resonances import (Rectangle, ResonanceSet, eigenvalues,
                         resonance_search)
from .scattering import (ScatteringData, ScatteringFunction,
                         norming_constants, validate_scattering_class)
from .inversion import invert, recover_shear, save_diagnostics

COMMANDS = ("forward", "resonances", "invert", "recover-mu", "check")

# config keys a flag may override
_FLAG_KEYS = ("command", "out", "workers", "radius", "tol", "seed")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="loveres",
        description="forward/inverse resonance computations, file-in/file-out")
    p.add_argument("--config", required=True, help="run configuration (JSON)")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--radius", type=float, help="truncation radius R")
    p.add_argument("--tol", type=float, help="zero-location tolerance")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    return p


def load_config(args: argparse.Namespace) -> dict:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in _FLAG_KEYS:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if "workers" not in cfg and os.environ.get("LOVE_RES_WORKERS"):
        try:
            cfg["workers"] = int(os.environ["LOVE_RES_WORKERS"])
        except ValueError as exc:
            raise ConfigError("LOVE_RES_WORKERS must be an integer") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {cmd!r}")
    if not cfg.get("out"):
        raise ConfigError("config needs an output directory ('out')")
    for key in ("tol", "radius", "k_max", "mu_tail"):
        if key in cfg and not (isinstance(cfg[key], (int, float))
                               and cfg[key] > 0):
            raise ConfigError(f"'{key}' must be a positive number")
    if "workers" in cfg and (not isinstance(cfg["workers"], int)
                             or cfg["workers"] < 1):
        raise ConfigError("'workers' must be a positive integer")
    if "region" in cfg:
        r = cfg["region"]
        if (not isinstance(r, (list, tuple)) or len(r) != 4
                or not r[0] < r[1] or not r[2] < r[3]):
            raise ConfigError(
                "'region' must be [re_min, re_max, im_min, im_max] with "
                "min < max on both axes")
    if cmd == "resonances" and "region" not in cfg:
        raise ConfigError("'resonances' needs a search 'region'")
    if cmd == "invert":
        if "zeros" not in cfg:
            raise ConfigError("'invert' needs a 'zeros' CSV path")
        if "x_I" not in cfg or not cfg["x_I"] > 0:
            raise ConfigError("'invert' needs the support radius 'x_I' > 0")
    if cmd == "recover-mu":
        for key in ("potential1", "potential2", "mu_tail"):
            if key not in cfg:
                raise ConfigError(f"'recover-mu' needs '{key}'")
    if cmd in ("forward", "resonances", "check"):
        if "potential" not in cfg and "shear" not in cfg:
            raise ConfigError(f"'{cmd}' needs a 'potential' or 'shear' input")
        if "shear" in cfg and "omega" not in cfg:
            raise ConfigError("a 'shear' input needs a frequency 'omega'")


def _set_workers(cfg: dict) -> None:
    n = cfg.get("workers")
    if not n:
        return
    try:
        import numba
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))
    except (ImportError, ValueError):
        pass


def _load_input_potential(cfg: dict) -> PotentialProfile:
    try:
        if "potential" in cfg:
            return load_potential(cfg["potential"])
        profile = load_shear_profile(cfg["shear"])
        return calibrate(profile, float(cfg["omega"]))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot load input profile: {exc}") from exc


class _Artifacts:
    """Ordered, single-threaded output writing plus the run manifest."""

    def __init__(self, cfg: dict):
        self.out = cfg["out"]
        os.makedirs(self.out, exist_ok=True)
        self.cfg = cfg
        self.files = {}

    def path(self, name: str) -> str:
        return os.path.join(self.out, name)

    def register(self, name: str) -> None:
        with open(self.path(name), "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        self.files[name] = f"sha256:{digest}"

    def write_json(self, name: str, doc) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True, default=float)
        self.register(name)

    def write_csv(self, name: str, header, rows) -> None:
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(c)) if isinstance(c, float) else c
                            for c in row])
        self.register(name)

    def finish(self) -> None:
        canon = json.dumps(self.cfg, sort_keys=True,
                           separators=(",", ":")).encode()
        manifest = {
            "tool": "loveres",
            "version": __version__,
            "command": self.cfg["command"],
            "config": self.cfg,
            "config_hash": "sha256:" + hashlib.sha256(canon).hexdigest(),
            "outputs": dict(sorted(self.files.items())),
        }
        with open(self.path("run_manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)


def cmd_forward(cfg: dict, art: _Artifacts) -> None:
    pot = _load_input_potential(cfg)
    ev = JostEvaluator(pot, pot.h)
    try:
        eigs = eigenvalues(pot, pot.h, evaluator=ev,
                           tol=float(cfg.get("tol", 1e-12)))
        m = norming_constants(pot, pot.h, eigs, evaluator=ev)
    except LoveResError as exc:
        raise StageError("spectrum", exc) from exc
    data = ScatteringData(S=ScatteringFunction(ev), k_bound=eigs, m=m,
                          x_i=pot.x_i)
    report = validate_scattering_class(data, k_max=cfg.get("k_max"),
                                       n=int(cfg.get("n_check", 8192)))
    rset = ResonanceSet.from_zeros(eigs, np.zeros(len(eigs)))
    rset.to_csv(art.path("resonances.csv"), omega=pot.omega,
                mu_tail=cfg.get("mu_tail"))
    art.register("resonances.csv")
    data.save_manifest(art.path("scattering.json"), report=report)
    art.register("scattering.json")
    k_plot = float(cfg.get("k_plot", 20.0 / pot.x_i))
    k = np.linspace(k_plot / 1000, k_plot, 1000)
    s = data.S(k)
    art.write_csv("s_real_axis.csv", ["k", "re_s", "im_s"],
                  zip(k.tolist(), s.real.tolist(), s.imag.tolist()))


def cmd_resonances(cfg: dict, art: _Artifacts) -> None:
    pot = _load_input_potential(cfg)
    region = Rectangle(*map(float, cfg["region"]))
    rset = resonance_search(pot, pot.h, region,
                            tol=float(cfg.get("tol", 1e-10)))
    rset.to_csv(art.path("resonances.csv"), omega=pot.omega,
                mu_tail=cfg.get("mu_tail"))
    art.register("resonances.csv")
    art.write_json("summary.json", {
        "n_eigenvalues": rset.n_eigenvalues,
        "n_resonances": int(np.sum(rset.res_multiplicities)),
        "total": rset.total_count(),
        "symmetry_defect": rset.symmetry_defect(),
        "region": list(region.as_tuple()),
        "unresolved": [list(r.as_tuple()) for r in rset.unresolved],
    })


def cmd_invert(cfg: dict, art: _Artifacts) -> None:
    try:
        zeros = ResonanceSet.from_csv(cfg["zeros"])
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read zeros CSV: {exc}") from exc
    recovered, diagnostics = invert(
        zeros, x_i=float(cfg["x_I"]), R=cfg.get("radius"),
        n_grid=int(cfg.get("n_grid", 841)), k_max=cfg.get("k_max"),
        n_k=cfg.get("n_k"))
    save_potential(recovered, art.path("potential.json"))
    art.register("potential.json")
    save_diagnostics(diagnostics, art.path("diagnostics.json"))
    art.register("diagnostics.json")
    art.write_csv("potential.csv", ["x", "V"],
                  zip(recovered.grid.tolist(), recovered.values.tolist()))


def cmd_recover_mu(cfg: dict, art: _Artifacts) -> None:
    try:
        v1 = load_potential(cfg["potential1"])
        v2 = load_potential(cfg["potential2"])
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot load input potentials: {exc}") from exc
    omega1 = float(cfg.get("omega1", v1.omega or 0.0))
    omega2 = float(cfg.get("omega2", v2.omega or 0.0))
    if omega1 == omega2:
        raise ConfigError(
            "recover-mu precondition violated: the two potentials must come "
            f"from distinct frequencies (omega1 = omega2 = {omega1:g})")
    shear = recover_shear(v1, v2, omega1, omega2,
                          mu_tail=float(cfg["mu_tail"]))
    save_shear_profile(shear, art.path("shear.json"))
    art.register("shear.json")
    art.write_csv("mu.csv", ["x", "mu"],
                  zip(shear.depth_grid.tolist(), shear.mu_values.tolist()))


def cmd_check(cfg: dict, art: _Artifacts) -> None:
    pot = _load_input_potential(cfg)
    ev = JostEvaluator(pot, pot.h)
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    n = int(cfg.get("n_samples", 100))
    k = rng.uniform(0.3, 30.0 / pot.x_i, n)
    f0p, fp0p, _, _ = ev._eval(k.astype(complex), with_deriv=False)
    f0m, fp0m, _, _ = ev._eval(-k.astype(complex), with_deriv=False)
    wron = np.abs(f0p * fp0m - fp0p * f0m + 2j * k)
    eigs = eigenvalues(pot, pot.h, evaluator=ev)
    m = norming_constants(pot, pot.h, eigs, evaluator=ev)
    data = ScatteringData(S=ScatteringFunction(ev), k_bound=eigs, m=m,
                          x_i=pot.x_i)
    report = validate_scattering_class(data, k_max=cfg.get("k_max"))
    art.write_json("check.json", {
        "wronskian_max_residual": float(np.max(wron)),
        "n_samples": n,
        "seed": int(cfg.get("seed", 0)),
        "eigenvalues": [[z.real, z.imag] for z in eigs],
        "norming_constants": m,
        "class_report": report,
    })
    if not (report["condition1_pass"] and report["condition3_pass"]):
        raise ClassViolationError(
            f"scattering class conditions failed: {report}")


_DISPATCH = {
    "forward": cmd_forward,
    "resonances": cmd_resonances,
    "invert": cmd_invert,
    "recover-mu": cmd_recover_mu,
    "check": cmd_check,
}


def run(cfg: dict) -> int:
    _set_workers(cfg)
    art = _Artifacts(cfg)
    _DISPATCH[cfg["command"]](cfg, art)
    art.finish()
    return 0


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        if isinstance(exc.original, ClassViolationError):
            print(f"class violation: {exc}", file=sys.stderr)
            return 4
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ClassViolationError as exc:
        print(f"class violation: {exc}", file=sys.stderr)
        return 4
    except LoveResError as exc:
        print(f"numerical failure: stage '{cfg['command']}': {exc}",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
