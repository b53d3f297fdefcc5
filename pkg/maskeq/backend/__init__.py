# pylint: disable=unused-import
from maskeq.backend.msl import (KINDS, MAX_ORDER, REFRESHES, GadgetSpec,
                                MslPrinter, generate)
