# flake8: noqa
from rec_feedback.network import *
from rec_feedback.recommender import *
from rec_feedback.attachment import *
from rec_feedback.metrics import *
from rec_feedback.engine import *
from rec_feedback.evaluation import *
from rec_feedback.experiments import *
from rec_feedback.datasets import *

__version__ = "0.1.0"
