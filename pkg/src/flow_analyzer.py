#!/usr/bin/env python3
"""
Holomorphic Flow Analyzer
Orchestrates equilibrium search, local classification, orbit integration
and limit-set verdicts for z' = F(z), with a command-line front end
"""

import argparse
import os
import re
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from dotenv import load_dotenv

from . import __version__
from .analysis_report import AnalysisReport
from .equilibrium_classifier import (
    DirectionSpectrum, SimpleKind, classify_equilibrium, definite_directions
)
from .equilibrium_finder import Equilibrium, Region, find_equilibria
from .errors import ExpressionSyntaxError, HoloflowError, Inconclusive, PreconditionError
from .expression_ast import is_constant
from .expression_parser import parse
from .flow_integrator import FlowIntegrator, IntegrationConfig, Orbit
from .function_model import FunctionModel
from .limit_set_classifier import (
    FedWitness, OrbitClassification, PbReport, fed_witness, pb_report, resolve_center, trace_orbit
)
from .portrait_renderer import render_svg

ENV_SETTINGS = {
    'HOLOFLOW_MAX_TIME': 'max_time',
    'HOLOFLOW_ESCAPE_RADIUS': 'escape_radius',
    'HOLOFLOW_REL_TOL': 'rel_tol',
    'HOLOFLOW_CAPTURE_RADIUS': 'equilibrium_capture_radius',
}
CLI_FLAGS = {
    'max_time': '--max-time',
    'escape_radius': '--escape-radius',
    'rel_tol': '--rel-tol',
}
DEFAULT_SEEDS = "grid:10"


class UsageError(Exception):
    """Invalid command-line input"""

    def __init__(self, flag: str, reason: str):
        self.flag = flag
        self.reason = reason
        super().__init__(f"{flag}: {reason}")


@dataclass
class AnalysisResult:
    report: AnalysisReport
    equilibria: List[Equilibrium]
    spectra: Dict[complex, DirectionSpectrum]
    classifications: List[OrbitClassification]
    witnesses: List[FedWitness]
    pb: PbReport

    @property
    def orbits(self) -> List[Orbit]:
        halves = []
        for item in self.classifications:
            halves.append(item.forward)
            if item.backward is not None:
                halves.append(item.backward)
        return halves


def parse_box(flag: str, text: str) -> Region:
    """Region from 'x0,y0,x1,y1'"""
    parts = text.split(',')
    if len(parts) != 4:
        raise UsageError(flag, f"expected x0,y0,x1,y1, got {text!r}")
    try:
        x0, y0, x1, y1 = (float(p) for p in parts)
        return Region.from_box(x0, y0, x1, y1)
    except ValueError:
        raise UsageError(flag, f"not four numbers: {text!r}")
    except PreconditionError as e:
        raise UsageError(flag, str(e))


def parse_seed_spec(spec: str, box: Region) -> List[complex]:
    """
    Seeds from 'grid:N' or 'list:z1;z2;...'

    Args:
        spec: Seed specification
        box: Box covered by grid seeds

    Returns:
        Seed points in specification order
    """
    kind, _, body = spec.partition(':')
    if kind == 'grid':
        if not body.isdigit() or int(body) < 1:
            raise UsageError('--seeds', f"grid size must be a positive integer, got {body!r}")
        n = int(body)
        if n == 1:
            return [box.center]
        # Endpoint-weighted form keeps symmetric grids exactly symmetric
        xs = [(box.lo.real * (n - 1 - k) + box.hi.real * k) / (n - 1) for k in range(n)]
        ys = [(box.lo.imag * (n - 1 - k) + box.hi.imag * k) / (n - 1) for k in range(n)]
        return [complex(x, y) for y in ys for x in xs]
    if kind == 'list':
        seeds = []
        for item in filter(None, (part.strip() for part in body.split(';'))):
            try:
                tree = parse(item)
            except ExpressionSyntaxError as e:
                raise UsageError('--seeds', f"{item!r}: {e}")
            if not is_constant(tree):
                raise UsageError('--seeds', f"{item!r} is not a constant")
            seeds.append(FunctionModel(tree, item)(0j))
        if not seeds:
            raise UsageError('--seeds', "empty seed list")
        return seeds
    raise UsageError('--seeds', f"expected grid:N or list:z1;z2;..., got {spec!r}")


class FlowAnalyzer:
    """Orchestrator for holomorphic flow analysis"""

    def __init__(self, config: Optional[IntegrationConfig] = None, verbose: bool = True, **overrides):
        """
        Initialize the analyzer

        Args:
            config: Integration settings (if not provided, built from HOLOFLOW_* env vars)
            verbose: Print progress lines
            **overrides: IntegrationConfig fields that take precedence (None values ignored)
        """
        load_dotenv()
        base = config or self.config_from_env()
        self.config = base.replace(**{k: v for k, v in overrides.items() if v is not None})
        self.verbose = verbose

    @staticmethod
    def config_from_env() -> IntegrationConfig:
        settings = {}
        for variable, name in ENV_SETTINGS.items():
            raw = os.getenv(variable)
            if raw is None or not raw.strip():
                continue
            try:
                settings[name] = float(raw)
            except ValueError:
                raise ValueError(f"{variable} must be a number, got {raw!r}")
        return IntegrationConfig(**settings)

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    def locate_equilibria(self, function: FunctionModel, region: Region) -> List[Equilibrium]:
        """Find, classify and (for center candidates) resolve all equilibria in a region"""
        self._log(f"🔍 Locating equilibria of z' = {function.source}")
        found = find_equilibria(function, region)
        classified = [classify_equilibrium(eq, function) for eq in found]

        resolved = []
        for eq in classified:
            if eq.kind == SimpleKind.CenterOrFocus.value:
                try:
                    outcome = resolve_center(eq, function, region, classified, self.config)
                    eq = replace(eq, kind=outcome.kind.value)
                except Inconclusive as e:
                    self._log(f"⚠️  Center test inconclusive at {eq.location}: {e}")
            resolved.append(eq)

        for eq in resolved:
            self._log(f"📐 {eq.location:.6g}: order {eq.order}, index {eq.index}, {eq.kind}")
        return resolved

    def seeds_for(self, seeds: Union[str, Sequence[complex]], box: Region,
                  function: FunctionModel, equilibria: Sequence[Equilibrium]) -> List[complex]:
        """Seed points with those inside a capture radius removed"""
        points = parse_seed_spec(seeds, box) if isinstance(seeds, str) else [complex(s) for s in seeds]
        integrator = FlowIntegrator(function, self.config, equilibria)
        return [z for z in points
                if all(abs(z - eq.location) > integrator.capture_radius(eq) for eq in equilibria)
                and function(z) != 0]

    def analyze(self, function_source: str, region: Region,
                seeds: Union[str, Sequence[complex]] = DEFAULT_SEEDS,
                seed_box: Optional[Region] = None) -> AnalysisResult:
        """
        Run the full pipeline

        Args:
            function_source: Expression for F(z)
            region: Analysis rectangle
            seeds: 'grid:N', 'list:...' or explicit points
            seed_box: Box for grid seeds (defaults to the region)

        Returns:
            AnalysisResult with report and raw orbits
        """
        started = time.perf_counter()
        function = FunctionModel.from_source(function_source)
        equilibria = self.locate_equilibria(function, region)
        spectra = {eq.location: definite_directions(eq) for eq in equilibria if eq.order >= 2}

        points = self.seeds_for(seeds, seed_box or region, function, equilibria)
        self._log(f"🌀 Classifying {len(points)} orbits")
        integrator = FlowIntegrator(function, self.config, equilibria)
        classifications = [trace_orbit(function, z, self.config, equilibria, region, integrator)
                           for z in points]

        witnesses = []
        for eq in equilibria:
            if eq.order < 2:
                continue
            self._log(f"🧭 Elliptic sector witness at {eq.location:.6g} ({2 * eq.order - 2} sectors)")
            witness = fed_witness(eq, function, spectra[eq.location], self.config, equilibria, region)
            if not witness.success:
                self._log(f"⚠️  Witness failed in sector {witness.failed_sector} "
                          f"at radius {witness.witness_radius:.3g}")
            witnesses.append(witness)

        pb = pb_report(function, region, points, self.config, equilibria, classifications)
        if not pb.hypothesis_satisfied:
            self._log("⚠️  Expression contains division; trichotomy not asserted")
        elif pb.violations:
            self._log(f"⚠️  {len(pb.violations)} trichotomy violations")

        report = AnalysisReport.build(
            function=function_source, region=region, equilibria=equilibria, spectra=spectra,
            classifications=classifications, witnesses=witnesses, pb=pb, config=self.config,
            version=__version__, wall_time_ms=(time.perf_counter() - started) * 1000,
            seeds=seeds if isinstance(seeds, str) else None,
        )
        self._log(f"✅ {len(equilibria)} equilibria, {len(classifications)} orbits, "
                  f"{len(pb.violations)} violations")
        return AnalysisResult(report, equilibria, spectra, classifications, witnesses, pb)

    def write_outputs(self, result: AnalysisResult, json_path: Optional[Path] = None,
                      svg_path: Optional[Path] = None) -> None:
        if json_path:
            result.report.write(json_path)
            self._log(f"💾 Report saved to {json_path}")
        if svg_path:
            render_svg(result.report, result.orbits, svg_path)
            self._log(f"💾 Portrait saved to {svg_path}")


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message: str):
        match = re.search(r'(--[\w-]+)', message)
        raise UsageError(match.group(1) if match else self.prog, message)


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog='holoflow', description="Analyze holomorphic planar flows z' = F(z)")
    commands = parser.add_subparsers(dest='command', required=True)

    analyze = commands.add_parser('analyze', help='Analyze a function over a box')
    analyze.add_argument('--function', required=True, help='Expression for F(z)')
    analyze.add_argument('--box', required=True, help='Analysis rectangle x0,y0,x1,y1')
    analyze.add_argument('--seeds', default=DEFAULT_SEEDS, help='grid:N or list:z1;z2;...')
    analyze.add_argument('--seed-box', help='Box for grid seeds (defaults to --box)')
    analyze.add_argument('--json', type=Path, help='Write the JSON report here')
    analyze.add_argument('--svg', type=Path, help='Write the SVG portrait here')
    analyze.add_argument('--max-time', type=float, help='Time budget per orbit half (default 200)')
    analyze.add_argument('--escape-radius', type=float, help='Escape radius (default 10)')
    analyze.add_argument('--rel-tol', type=float, help='Relative tolerance (default 1e-9)')
    analyze.add_argument('--quiet', action='store_true',
                         help='Suppress progress output (implied when the report goes to stdout)')
    return parser


def _attach_values(argv: Sequence[str]) -> List[str]:
    """Glue box values such as '-0.5,-1,1,1' to their flag so they are not read as options"""
    joined = []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token in ('--box', '--seed-box') and i + 1 < len(tokens) and tokens[i + 1].startswith('-') \
                and not tokens[i + 1].startswith('--'):
            joined.append(f"{token}={tokens[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Command-line entry point; returns 0, 1 (usage error) or 2 (analysis error)"""
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(_attach_values(argv))
        region = parse_box('--box', args.box)
        seed_box = parse_box('--seed-box', args.seed_box) if args.seed_box else region
        try:
            parse(args.function)
        except ExpressionSyntaxError as e:
            raise UsageError('--function', str(e))
        parse_seed_spec(args.seeds, seed_box)
        try:
            analyzer = FlowAnalyzer(verbose=not args.quiet and args.json is not None,
                                    max_time=args.max_time, escape_radius=args.escape_radius, rel_tol=args.rel_tol)
        except ValueError as e:
            flag = next((f for name, f in CLI_FLAGS.items() if str(e).startswith(name)), None)
            flag = flag or next((v for v in ENV_SETTINGS if v in str(e)), 'config')
            raise UsageError(flag, str(e))
    except UsageError as e:
        print(f"usage error: {e.flag}: {e.reason}", file=sys.stderr)
        return 1

    try:
        result = analyzer.analyze(args.function, region, args.seeds, seed_box)
        analyzer.write_outputs(result, args.json, args.svg)
        if not args.json:
            print(result.report.to_json(), end='')
    except (HoloflowError, OSError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 2

    return 0


if __name__ == "__main__":
    exit(main())
