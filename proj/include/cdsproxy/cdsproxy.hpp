#pragma once

#include "cdsproxy/error.hpp"
#include "cdsproxy/random.hpp"
#include "cdsproxy/numerics.hpp"
#include "cdsproxy/core.hpp"
#include "cdsproxy/bayes.hpp"
#include "cdsproxy/geometric.hpp"
#include "cdsproxy/parametric.hpp"
#include "cdsproxy/tree.hpp"
#include "cdsproxy/classifiers.hpp"
#include "cdsproxy/parallel.hpp"
#include "cdsproxy/evaluation.hpp"
#include "cdsproxy/baselines.hpp"
#include "cdsproxy/proxy.hpp"
#include "cdsproxy/io.hpp"
#include "cdsproxy/datagen.hpp"
#include "cdsproxy/report.hpp"
