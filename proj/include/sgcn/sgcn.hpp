#ifndef SGCN_SGCN_HPP
#define SGCN_SGCN_HPP

#include "balance_paths.hpp"
#include "checkpoint.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "io.hpp"
#include "random.hpp"
#include "sgcn_model.hpp"
#include "signed_graph.hpp"
#include "sse.hpp"
#include "training.hpp"

#endif // SGCN_SGCN_HPP
