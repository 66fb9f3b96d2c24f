import argparse
import logging
import multiprocessing
import os
import sys

from etpa import cli, config
from etpa.errors import EtpaError
from etpa.scan import write_csv

#output directory for the preset tables
OUTPUT_DIR = config.OUTPUT_DIR

logger = logging.getLogger("run_scans")


def preset_settings(name, jobs=None):
    '''settings of one preset exactly as `etpa --preset name` resolves them'''
    parser = cli.build_parser()
    argv = ["--preset", name, "--quiet"]
    if jobs:
        argv += ["--jobs", str(jobs)]
    return cli.resolve_settings(parser.parse_args(argv), parser)


def run_preset(name, output_dir=None, jobs=None, queue=None):
    '''runs one preset and writes <output_dir>/<name>.csv, returning the path'''
    output_dir = output_dir or OUTPUT_DIR
    settings = preset_settings(name, jobs)
    result = cli.run(settings, queue=queue)
    os.makedirs(output_dir, exist_ok=True)
    csv_path = os.path.join(output_dir, f"{name}.csv")
    write_csv(result, csv_path)
    logger.info("%s: %d rows -> %s", name, len(result.frame), csv_path)
    return csv_path


def run_preset_worker(name, output_dir, jobs, queue):
    """
    Multiprocessing entry point for one preset.
    Reports progress and completion/errors via queue instead of stdout.
    """
    try:
        path = run_preset(name, output_dir, jobs, queue)
        queue.put(("DONE", path))
    except (EtpaError, ArithmeticError, OSError) as e:
        queue.put(("ERROR", f"{name}: {e}"))


def run_presets(names, output_dir=None, jobs=None):
    '''runs the presets one after another; returns the names that failed'''
    failed = []
    for name in names:
        try:
            path = run_preset(name, output_dir, jobs)
            print(f"{name}: {path}", flush=True)
        except (EtpaError, ArithmeticError, OSError) as e:
            logger.error("%s failed: %s", name, e)
            failed.append(name)
    return failed


def main(argv=None):
    p = argparse.ArgumentParser(description="Write the CSV table of every figure preset.")
    p.add_argument("presets", nargs="*", help=f"preset names (default: all of {', '.join(config.PRESETS)})")
    p.add_argument("--output-dir", default=OUTPUT_DIR)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args(argv)

    unknown = [n for n in args.presets if n not in config.PRESETS]
    if unknown:
        p.error(f"unknown presets: {', '.join(unknown)}")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    failed = run_presets(args.presets or list(config.PRESETS), args.output_dir, args.jobs)
    return 3 if failed else 0


if __name__ == "__main__":
    multiprocessing.freeze_support()
    sys.exit(main())
