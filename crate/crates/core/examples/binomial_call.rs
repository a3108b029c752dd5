//! One-period binomial market with a 1% spread: check no-arbitrage and price
//! a claim paying one unit of asset 1 in the up state.

use illiq_core::{check_na, superhedge_premium, AdaptedVectorProcess, BidAskSpec, EventTree, MarketModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = EventTree::uniform(2, 1, &[0.5, 0.5])?;
    // Row i, column j: units of asset i paid for one unit of asset j.
    let quote = |mid: f64| vec![vec![1.0, mid * 1.01], vec![1.01 / mid, 1.0]];
    let spec = BidAskSpec {
        matrices: vec![quote(1.0), quote(2.0), quote(0.5)],
    };
    let model = MarketModel::from_bid_ask(tree.clone(), &spec)?;

    println!("no arbitrage: {}", check_na(&model)?.holds);

    let claim = AdaptedVectorProcess::terminal(&tree, |n| if n == 1 { vec![1.0, 0.0] } else { vec![0.0, 0.0] })?;
    let price = superhedge_premium(&model, &claim, 0)?;
    println!("superhedging premium in asset 1: {:.6}", price.alpha);
    Ok(())
}
