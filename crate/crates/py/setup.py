"""Builds the extension module with cargo; no Rust build backend needed.

Install with `pip install -e . --no-build-isolation` from this directory.
"""

import shutil
import subprocess
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

WORKSPACE = Path(__file__).resolve().parent.parent.parent


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "invlift-py"],
            cwd=WORKSPACE,
            check=True,
        )
        release = WORKSPACE / "target" / "release"
        built = next(
            p
            for name in ("libinvlift_py.so", "libinvlift_py.dylib", "invlift_py.dll")
            if (p := release / name).exists()
        )
        target = Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, target)


setup(
    name="invlift-py",
    version="0.1.0",
    description="Python bindings for the invariant lifting library",
    ext_modules=[Extension("invlift_py", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
    zip_safe=False,
)
