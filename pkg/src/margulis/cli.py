"""Command-line surface: generator specs in, certificates and curves out.

Subcommands:

  certify    apply the discreteness criterion to a pair (g, h) from a job file
  boundary   tabulate the radial boundary function B(r) to CSV
  slope      fit the growth exponent of B(r), or scan Liouville slow windows
  gallery    build the screw-inversion pair at radius r and certify it
  oracle     enumerate short words and report near-identity hits

Exit codes: 0 the job ran (any verdict), 2 malformed spec, 3 criterion
inapplicable (h fixes infinity), 4 a search budget was exhausted.

Job files are JSON with keys ``dimension``, ``epsilon``, ``parabolic``,
``h``, ``command``; every run echoes its fully resolved spec (defaults
included) on one line, and that echo re-parses to the identical job.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .criterion import (
    Certificate,
    ComparisonReport,
    InexactBoundary,
    certify,
    verify_witness,
    waterman_report,
)
from .dim4 import (
    CylScrew,
    as_alpha,
    continued_fraction,
    cyl_boundary,
    liouville_demo,
    screw_inversion_pair,
    slope_estimate,
)
from .geometry import HPoint
from .moebius import (
    Dilation,
    FixesInfinity,
    MoebiusWord,
    Orthogonal,
    Translation,
    UnitInversion,
    WordBudgetExceeded,
    near_identity_scan,
)
from .parabolic import (
    DEFAULT_BUDGET,
    MargulisParams,
    NotParabolic,
    ScrewTranslation,
    default_epsilon,
    normalize,
)

CAVEAT = (
    "NonDiscrete is certified under the hypothesis that "
    "ε is below the Margulis constant of ℍⁿ"
)

GALLERY_NAMES = ("screw-inversion",)

EXIT_OK = 0
EXIT_BAD_SPEC = 2
EXIT_INAPPLICABLE = 3
EXIT_BUDGET = 4


class SpecError(ValueError):
    """The job specification failed validation."""


# -- primitive word (de)serialization --------------------------------------


def word_to_json(word: MoebiusWord) -> list:
    out = []
    for p in word.factors:
        if isinstance(p, Translation):
            out.append({"type": "translation", "b": p.b.tolist()})
        elif isinstance(p, Orthogonal):
            out.append({"type": "orthogonal", "q": p.Q.tolist()})
        elif isinstance(p, Dilation):
            out.append({"type": "dilation", "factor": p.factor})
        else:
            out.append({"type": "inversion"})
    return out


def word_from_json(factors: list, n: int) -> MoebiusWord:
    prims = []
    for item in factors:
        if not isinstance(item, dict) or "type" not in item:
            raise SpecError(f"malformed primitive entry: {item!r}")
        kind = item["type"]
        try:
            if kind == "translation":
                prims.append(Translation(np.asarray(item["b"], dtype=float)))
            elif kind == "orthogonal":
                prims.append(Orthogonal(np.asarray(item["q"], dtype=float)))
            elif kind == "dilation":
                prims.append(Dilation(float(item["factor"])))
            elif kind == "inversion":
                prims.append(UnitInversion())
            else:
                raise SpecError(f"unknown primitive type {kind!r}")
        except (KeyError, ValueError, TypeError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"bad {kind} primitive: {exc}") from exc
    try:
        return MoebiusWord(tuple(prims), n)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def _alpha_to_json(frac: Fraction) -> list:
    return [frac.numerator, frac.denominator]


def _alpha_from_spec(value):
    """Alpha as given in a spec: number, [p, q], or a named constant."""
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SpecError("rational alpha must be a [p, q] pair")
        return (int(value[0]), int(value[1]))
    if isinstance(value, (int, float)):
        return float(value)
    raise SpecError(f"cannot interpret alpha {value!r}")


# -- job specification ------------------------------------------------------


@dataclass
class JobSpec:
    """A fully resolved job: the five canonical keys of the JSON schema."""

    dimension: int
    epsilon: float
    parabolic: dict | None
    h: list | None
    command: dict

    @classmethod
    def from_dict(cls, raw: dict, *, command: dict | None = None,
                  epsilon_override: float | None = None) -> "JobSpec":
        if not isinstance(raw, dict):
            raise SpecError("job spec must be a JSON object")
        allowed = {"dimension", "epsilon", "parabolic", "h", "command"}
        unknown = set(raw) - allowed
        if unknown:
            raise SpecError(f"unknown spec keys: {sorted(unknown)}")

        parabolic = raw.get("parabolic")
        if parabolic is not None:
            if not isinstance(parabolic, dict):
                raise SpecError("parabolic spec must be an object")
            if "cylindrical" in parabolic:
                if set(parabolic) != {"cylindrical"}:
                    raise SpecError("cylindrical parabolic spec takes no other keys")
                cyl = parabolic["cylindrical"]
                if not isinstance(cyl, dict) or "alpha" not in cyl:
                    raise SpecError("cylindrical spec needs an alpha")
                alpha = as_alpha(_alpha_from_spec(cyl["alpha"]))
                parabolic = {"cylindrical": {"alpha": _alpha_to_json(alpha)}}
            elif "rotation" in parabolic or "translation" in parabolic:
                if set(parabolic) != {"rotation", "translation"}:
                    raise SpecError("matrix parabolic spec needs rotation and translation")
                parabolic = {
                    "rotation": np.asarray(parabolic["rotation"], dtype=float).tolist(),
                    "translation": np.asarray(parabolic["translation"], dtype=float)
                    .reshape(-1).tolist(),
                }
            else:
                raise SpecError("parabolic spec needs cylindrical or rotation+translation")

        dimension = raw.get("dimension")
        if dimension is None:
            if parabolic is None:
                raise SpecError("spec needs a dimension or a parabolic to infer it from")
            dimension = (4 if "cylindrical" in parabolic
                         else len(parabolic["translation"]) + 1)
        dimension = int(dimension)
        if dimension < 2:
            raise SpecError("dimension must be at least 2")
        if parabolic is not None and "cylindrical" in parabolic and dimension != 4:
            raise SpecError("cylindrical parabolic specs are 4-dimensional")
        if (parabolic is not None and "translation" in parabolic
                and len(parabolic["translation"]) != dimension - 1):
            raise SpecError("translation length does not match dimension")

        if epsilon_override is not None:
            epsilon = float(epsilon_override)
        elif raw.get("epsilon") is not None:
            epsilon = float(raw["epsilon"])
        else:
            epsilon = default_epsilon(dimension)
        if not epsilon > 0:
            raise SpecError("epsilon must be positive")

        h = raw.get("h")
        if h is not None:
            if not isinstance(h, list):
                raise SpecError("h must be a list of primitives")
            h = word_to_json(word_from_json(h, dimension))  # validate and canonicalize

        cmd = command if command is not None else raw.get("command")
        if cmd is None:
            raise SpecError("no command given")
        if isinstance(cmd, str):
            cmd = {"name": cmd}
        if not isinstance(cmd, dict) or "name" not in cmd:
            raise SpecError("command must name a subcommand")

        return cls(dimension, epsilon, parabolic, h, dict(cmd))

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "epsilon": self.epsilon,
            "parabolic": self.parabolic,
            "h": self.h,
            "command": self.command,
        }

    def echo(self, stream=None):
        print("spec:", json.dumps(self.to_dict(), sort_keys=True),
              file=stream or sys.stdout)

    # -- builders ----------------------------------------------------------

    def alpha(self) -> Fraction | None:
        if self.parabolic and "cylindrical" in self.parabolic:
            p, q = self.parabolic["cylindrical"]["alpha"]
            return Fraction(p, q)
        return None

    def build_screw(self) -> ScrewTranslation:
        if self.parabolic is None:
            raise SpecError("this command needs a parabolic generator")
        if "cylindrical" in self.parabolic:
            return CylScrew(self.alpha()).to_screw()
        try:
            return normalize(
                np.asarray(self.parabolic["rotation"], dtype=float),
                np.asarray(self.parabolic["translation"], dtype=float),
            )
        except (NotParabolic, ValueError) as exc:
            raise SpecError(f"bad parabolic generator: {exc}") from exc

    def build_h(self) -> MoebiusWord | None:
        if self.h is None:
            return None
        return word_from_json(self.h, self.dimension)


def load_job(path: str, command: dict, epsilon_override=None) -> JobSpec:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read job file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"job file is not valid JSON: {exc}") from exc
    if isinstance(raw.get("command"), (str, dict)):
        given = raw["command"]
        name = given if isinstance(given, str) else given.get("name")
        if name != command["name"]:
            raise SpecError(
                f"job file says command {name!r}, invoked as {command['name']!r}")
    return JobSpec.from_dict(raw, command=command, epsilon_override=epsilon_override)


# -- shared report rendering ------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def print_certificate(job: JobSpec, params: MargulisParams,
                      cert: Certificate, report: ComparisonReport):
    job.echo()
    print(f"epsilon: {_fmt(params.epsilon)} (c = {_fmt(params.c)})")
    print(f"R_h = {_fmt(cert.R_h)}")
    print(f"B(center) = {_fmt(cert.B_center)}, B(cocenter) = {_fmt(cert.B_cocenter)}"
          + ("" if cert.boundary_exact else "  [upper bounds: budget hit]"))
    print(f"threshold (geometric) = {_fmt(cert.threshold)}")
    print(f"threshold (waterman, K=2) = {_fmt(report.waterman_threshold)}"
          f" -> {report.waterman_verdict}")
    print(f"threshold (iterated, {report.note}) = {_fmt(report.iterated_threshold)}"
          f" -> {report.iterated_verdict}")
    print(f"verdict: {cert.verdict}")
    print(f"slack = {_fmt(cert.slack)}")
    if cert.witness is not None:
        print(f"witness: v = {cert.witness.v.tolist()}, t = {_fmt(cert.witness.t)}"
              " (re-verified)")
    else:
        print("witness: none")
    print(CAVEAT)


def certificate_document(job: JobSpec, params: MargulisParams,
                         cert: Certificate, report: ComparisonReport) -> dict:
    witness = None
    if cert.witness is not None:
        witness = {"v": cert.witness.v.tolist(), "t": cert.witness.t}
    return {
        "spec": job.to_dict(),
        "epsilon": params.epsilon,
        "c": params.c,
        "verdict": cert.verdict,
        "R_h": cert.R_h,
        "B_center": cert.B_center,
        "B_cocenter": cert.B_cocenter,
        "threshold": cert.threshold,
        "slack": cert.slack,
        "boundary_exact": cert.boundary_exact,
        "witness": witness,
        "waterman_threshold": report.waterman_threshold,
        "waterman_verdict": report.waterman_verdict,
        "iterated_threshold": report.iterated_threshold,
        "iterated_verdict": report.iterated_verdict,
        "iterated_note": report.note,
        "caveat": CAVEAT,
    }


def _write_json(path: str, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_certification(job: JobSpec, args) -> int:
    g = job.build_screw()
    h = job.build_h()
    if h is None:
        raise SpecError("certify needs the map h")
    params = MargulisParams(job.epsilon)
    cert = certify(g, h, params, args.budget)
    report = waterman_report(g, h, params, args.budget)
    print_certificate(job, params, cert, report)
    if getattr(args, "out", None):
        _write_json(args.out, certificate_document(job, params, cert, report))
    return EXIT_OK


def _verify_witness_mode(path: str, budget: int) -> int:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read certificate: {exc}") from exc
    if "spec" not in doc:
        raise SpecError("certificate carries no spec echo")
    job = JobSpec.from_dict(doc["spec"])
    job.echo()
    if doc.get("witness") is None:
        print("witness verification: FAIL (certificate carries no witness)")
        return EXIT_OK
    g = job.build_screw()
    h = job.build_h()
    if h is None:
        raise SpecError("certificate spec carries no map h")
    params = MargulisParams(doc.get("epsilon", job.epsilon))
    x = HPoint(np.asarray(doc["witness"]["v"], dtype=float),
               float(doc["witness"]["t"]))
    ok = verify_witness(g, h, params, x, budget)
    print(f"witness verification: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK


# -- subcommands -------------------------------------------------------------


def cmd_certify(args) -> int:
    if args.verify_witness:
        return _verify_witness_mode(args.verify_witness, args.budget)
    if not args.spec:
        raise SpecError("certify needs a job file (or --verify-witness)")
    job = load_job(args.spec, {"name": "certify"}, args.epsilon)
    return _run_certification(job, args)


def _parse_alpha_text(text: str):
    if text in ("golden", "sqrt2-1"):
        return text
    if "/" in text:
        num, den = text.split("/", 1)
        return (int(num), int(den))
    return float(text)


def cmd_boundary(args) -> int:
    alpha_raw = _parse_alpha_text(args.alpha)
    frac = as_alpha(alpha_raw)
    epsilon = args.epsilon if args.epsilon is not None else default_epsilon(4)
    params = MargulisParams(epsilon)
    if args.samples < 1:
        raise SpecError("need at least one sample")
    if not 0 < args.r_min <= args.r_max:
        raise SpecError("need 0 < r_min <= r_max")
    job = JobSpec.from_dict(
        {
            "dimension": 4,
            "epsilon": epsilon,
            "parabolic": {"cylindrical": {"alpha": _alpha_to_json(frac)}},
            "h": None,
        },
        command={"name": "boundary", "r_min": args.r_min, "r_max": args.r_max,
                 "samples": args.samples, "out": args.out},
    )
    job.echo()

    qset = set(continued_fraction(alpha_raw).q)
    radii = np.geomspace(args.r_min, args.r_max, args.samples)
    lines = ["r,B,i_star,is_convergent_denominator"]
    inexact = 0
    for r in radii:
        ev = cyl_boundary(frac, params, float(r), args.budget)
        flag = 1 if ev.attained_index in qset else 0
        lines.append(f"{float(r):.17g},{ev.value:.17g},{ev.attained_index},{flag}")
        if not ev.exact:
            inexact += 1
    with open(args.out, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(radii)} rows to {args.out}")

    if args.plot:
        from . import plots

        values = [float(line.split(",")[1]) for line in lines[1:]]
        flags = [line.split(",")[3] == "1" for line in lines[1:]]
        plots.render_boundary_curve(radii, values, flags, args.plot,
                                    title=f"radial boundary function, alpha = {args.alpha}")
        print(f"wrote figure to {args.plot}")

    if inexact:
        print(f"budget exhausted on {inexact} of {len(radii)} rows; "
              "those B values are upper bounds", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_slope(args) -> int:
    epsilon = args.epsilon if args.epsilon is not None else default_epsilon(4)
    params = MargulisParams(epsilon)

    if args.liouville is not None:
        r_min = args.r_min if args.r_min is not None else 1e3
        r_max = args.r_max if args.r_max is not None else 1e9
        table = liouville_demo(args.liouville, params, (r_min, r_max),
                               budget=args.budget)
        job = JobSpec.from_dict(
            {"dimension": 4, "epsilon": epsilon,
             "parabolic": {"cylindrical": {"alpha": _alpha_to_json(table.alpha)}},
             "h": None},
            command={"name": "slope", "liouville": args.liouville,
                     "r_min": r_min, "r_max": r_max},
        )
        job.echo()
        flagged = [w for w in table.windows if w.flagged]
        print(f"windows: {len(table.windows)}, flagged (local slope < "
              f"{table.flag_threshold}): {len(flagged)}")
        for w in flagged:
            print(f"  r in [{w.r_lo:.3e}, {w.r_hi:.3e}]: slope {w.slope:.4f}")
        if not flagged:
            print("  no flagged windows")
        if args.out:
            _write_json(args.out, {
                "spec": job.to_dict(),
                "windows": [{"r_lo": w.r_lo, "r_hi": w.r_hi, "slope": w.slope,
                             "flagged": w.flagged} for w in table.windows],
            })
        if args.plot:
            from . import plots

            plots.render_local_slopes(
                table, args.plot,
                title=f"local slopes, truncated Liouville k <= {args.liouville}")
            print(f"wrote figure to {args.plot}")
        return EXIT_OK

    if args.alpha is None:
        raise SpecError("slope needs --alpha or --liouville")
    alpha_raw = _parse_alpha_text(args.alpha)
    frac = as_alpha(alpha_raw)
    r_min = args.r_min if args.r_min is not None else 1e2
    r_max = args.r_max if args.r_max is not None else 1e10
    est = slope_estimate(frac, params, r_min, r_max, args.samples, args.budget)
    job = JobSpec.from_dict(
        {"dimension": 4, "epsilon": epsilon,
         "parabolic": {"cylindrical": {"alpha": _alpha_to_json(frac)}},
         "h": None},
        command={"name": "slope", "r_min": r_min, "r_max": r_max,
                 "samples": args.samples},
    )
    job.echo()
    print(f"fitted exponent = {est.exponent:.4f} (residual {est.residual:.4f})")
    print(f"max B(r)/sqrt(r) over grid = {est.max_sqrt_ratio:.4f}")
    if args.out:
        _write_json(args.out, {
            "spec": job.to_dict(),
            "exponent": est.exponent,
            "residual": est.residual,
            "max_sqrt_ratio": est.max_sqrt_ratio,
            "radii": list(est.radii),
            "values": list(est.values),
        })
    if args.plot:
        from . import plots

        plots.render_slope(est, args.plot,
                           title=f"growth of B(r), alpha = {args.alpha}")
        print(f"wrote figure to {args.plot}")
    return EXIT_OK


def cmd_gallery(args) -> int:
    if args.name not in GALLERY_NAMES:
        raise SpecError(f"unknown gallery entry {args.name!r}; "
                        f"available: {', '.join(GALLERY_NAMES)}")
    if args.verify_witness:
        return _verify_witness_mode(args.verify_witness, args.budget)
    if args.r is None:
        raise SpecError("gallery needs --r")
    if not args.r > 0:
        raise SpecError("gallery radius must be positive")
    alpha_raw = _parse_alpha_text(args.alpha)
    cyl, h = screw_inversion_pair(alpha_raw, args.r)
    epsilon = args.epsilon if args.epsilon is not None else default_epsilon(4)
    job = JobSpec.from_dict(
        {
            "dimension": 4,
            "epsilon": epsilon,
            "parabolic": {"cylindrical": {"alpha": _alpha_to_json(cyl.alpha)}},
            "h": word_to_json(h),
        },
        command={"name": "gallery", "gallery_name": args.name, "r": args.r},
    )
    return _run_certification(job, args)


def cmd_oracle(args) -> int:
    job = load_job(args.spec, {"name": "oracle", "max_len": args.max_len,
                               "delta": args.delta}, args.epsilon)
    gens = []
    names = []
    if job.parabolic is not None:
        gens.append(job.build_screw().as_word())
        names.append("g")
    h = job.build_h()
    if h is not None:
        gens.append(h)
        names.append("h")
    if not gens:
        raise SpecError("oracle needs at least one generator (parabolic or h)")
    job.echo()
    basepoint = HPoint(np.zeros(job.dimension - 1), 1.0)
    hits = near_identity_scan(gens, args.max_len, basepoint, args.delta,
                              args.word_budget)
    print(f"near-identity hits (displacement < {args.delta}): {len(hits)}")
    for hit in hits:
        print(f"  {hit.label(names)}: displacement = {_fmt(hit.displacement)}, "
              f"acts_as_identity = {hit.acts_as_identity}")
    print("note: absence of hits proves nothing; "
          "this scan is one-sided evidence only")
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="margulis",
        description="Margulis regions, isometric spheres, and "
                    "non-discreteness certificates",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--epsilon", type=float, default=None,
                       help="Margulis parameter (default depends on dimension)")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                       help="index cap for infimum scans")

    p = sub.add_parser("certify", help="run the discreteness criterion on a job file")
    p.add_argument("spec", nargs="?", help="JSON job file")
    p.add_argument("--out", help="write the certificate document as JSON")
    p.add_argument("--verify-witness", metavar="CERT",
                   help="re-verify the witness of an emitted certificate")
    add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("boundary", help="tabulate the radial boundary function to CSV")
    p.add_argument("--alpha", required=True,
                   help="rotation number: float, p/q, golden, or sqrt2-1")
    p.add_argument("--r-min", type=float, required=True)
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--plot", help="also render the curve to this image file")
    add_common(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("slope", help="fit the growth exponent of B(r)")
    p.add_argument("--alpha", help="rotation number: float, p/q, golden, or sqrt2-1")
    p.add_argument("--liouville", type=int, choices=(3, 4, 5),
                   help="use the truncated Liouville number and scan local slopes")
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--out", help="write the report as JSON")
    p.add_argument("--plot", help="render a figure to this image file")
    add_common(p)
    p.set_defaults(func=cmd_slope)

    p = sub.add_parser("gallery", help="build and certify a named example pair")
    p.add_argument("--name", default="screw-inversion")
    p.add_argument("--r", type=float, default=None, help="radius parameter of the pair")
    p.add_argument("--alpha", default="golden")
    p.add_argument("--out", help="write the certificate document as JSON")
    p.add_argument("--verify-witness", metavar="CERT",
                   help="re-verify the witness of an emitted certificate")
    add_common(p)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("oracle", help="scan short words for near-identity hits")
    p.add_argument("spec", help="JSON job file naming the generators")
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--word-budget", type=int, default=100000)
    add_common(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
    except FixesInfinity as exc:
        print(f"inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (WordBudgetExceeded, InexactBoundary) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NotParabolic, ValueError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC


if __name__ == "__main__":
    sys.exit(main())
