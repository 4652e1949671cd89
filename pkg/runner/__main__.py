# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

import sys

from runner.cli import main

if __name__ == "__main__":
    sys.exit(main())
