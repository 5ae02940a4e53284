#!/usr/bin/env python3
"""
Example script: analyze the two reference flows and save their reports and portraits
"""

from pathlib import Path

from src import FlowAnalyzer, Region
from src.errors import HoloflowError


def generate_reference_portraits():
    """Analyze z^5 e^z and z^3 (z-1)^3 and write JSON + SVG for each"""

    # Function, analysis box, seed specification
    flows = {
        'fifth_order': {
            'function': 'z^5*exp(z)',
            'box': (-1, -1, 1, 1),
            'seeds': 'grid:12',
        },
        'two_triple_zeros': {
            'function': 'z^3*(z-1)^3',
            'box': (-0.5, -0.75, 1.5, 0.75),
            'seeds': 'grid:15',
        },
    }

    analyzer = FlowAnalyzer()

    output_dir = Path('./generated_portraits')
    output_dir.mkdir(exist_ok=True)

    successful = []
    failed = []

    print("🚀 Analyzing Reference Flows")
    print("=" * 50)

    for name, flow in flows.items():
        print(f"\n📈 {name}: z' = {flow['function']}")

        try:
            result = analyzer.analyze(flow['function'], Region.from_box(*flow['box']), flow['seeds'])
            analyzer.write_outputs(
                result,
                json_path=output_dir / f"{name}.json",
                svg_path=output_dir / f"{name}.svg"
            )

            if all(w.success for w in result.witnesses) and not result.pb.violations:
                successful.append(name)
                print("   ✅ Success!")
            else:
                failed.append(name)
                print("   ❌ Witness failed or trichotomy violated")

        except HoloflowError as e:
            failed.append(name)
            print(f"   ❌ Error: {e}")

    # Summary
    print(f"\n{'='*50}")
    print("📊 ANALYSIS SUMMARY")
    print(f"{'='*50}")

    if successful:
        print(f"\n✅ Successful ({len(successful)}):")
        for name in successful:
            print(f"   • {name}: {flows[name]['function']}")

    if failed:
        print(f"\n❌ Failed ({len(failed)}):")
        for name in failed:
            print(f"   • {name}: {flows[name]['function']}")

    print(f"\n📁 Portraits saved to: {output_dir.absolute()}")


if __name__ == "__main__":
    generate_reference_portraits()
