# run.py
"""
Command-Line Entry Point.

Loads environment variables from a `.env` file, then runs the click command
group. Caps, tolerances and paths are read by `netnl.config.Config` at import
time, so the `.env` file must be loaded first.

    python run.py simulate --scenario reference
    python run.py classify --behavior data/output/reference.behavior.json --expect local
"""

from dotenv import load_dotenv

# Must run BEFORE the package (and its Config) is imported.
load_dotenv()

from netnl.cli import main  # noqa: E402

if __name__ == '__main__':
    main()
